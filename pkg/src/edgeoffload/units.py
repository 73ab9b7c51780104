"""Unit conventions and conversions.

Canonical units used throughout the library: bits, bits/s, cycles, cycles/s,
joules, seconds.  Human-facing quantities (instance files, CLI output) use
MB for data sizes, Mb/s for rates, Gcycles for work, Gcycles/s for CPU speed,
J/Mb for radio energy and J/Gcycle for compute energy.

Fixed conventions: 1 MB = 8e6 bits (decimal megabyte), 1 Mb = 1e6 bits,
1 Gcycle = 1e9 cycles, 1 byte = 8 bits.  Task complexity ratios are quoted in
cycles/byte; the canonical form is cycles/bit (divide by 8).
"""

BITS_PER_MB = 8e6
BITS_PER_MBIT = 1e6
CYCLES_PER_GCYCLE = 1e9
BITS_PER_BYTE = 8.0


def mb_to_bits(mb: float) -> float:
    return mb * BITS_PER_MB


def bits_to_mb(bits: float) -> float:
    return bits / BITS_PER_MB


def mbps_to_bps(mbps: float) -> float:
    return mbps * BITS_PER_MBIT


def bps_to_mbps(bps: float) -> float:
    return bps / BITS_PER_MBIT


def gcycles_to_cycles(g: float) -> float:
    return g * CYCLES_PER_GCYCLE


def cycles_to_gcycles(c: float) -> float:
    return c / CYCLES_PER_GCYCLE


def j_per_mbit_to_j_per_bit(e: float) -> float:
    return e / BITS_PER_MBIT


def j_per_bit_to_j_per_mbit(e: float) -> float:
    return e * BITS_PER_MBIT


def j_per_gcycle_to_j_per_cycle(v: float) -> float:
    return v / CYCLES_PER_GCYCLE


def j_per_cycle_to_j_per_gcycle(v: float) -> float:
    return v * CYCLES_PER_GCYCLE


def cycles_per_byte_to_per_bit(a: float) -> float:
    return a / BITS_PER_BYTE


def cycles_per_bit_to_per_byte(a: float) -> float:
    return a * BITS_PER_BYTE
