"""Barrier solver on hand-built programs with known optima.

The quadratic-over-linear pattern used throughout: maximize x subject to
x^2/r <= 1 and r <= 1 has its optimum at x = r = 1 with value -1 for the
minimization form.
"""

import math
import random

import numpy as np
import pytest

from edgeoffload import barrier
from edgeoffload.barrier import (
    DelayRow,
    LinRow,
    Program,
    QolTerm,
    SolverParams,
    Status,
)
from edgeoffload.harness import random_small_instance
from edgeoffload.relaxation import build_relaxed


def qol_program(c0=0.0, scale=1.0, cap=1.0, rhs=1.0, extra_rows=()):
    # variables: z0 = x, z1 = r
    term = QolTerm(coef=1.0, rate=1, w_idx=(0,), w_coef=(1.0,), w_const=0.0)
    return Program(
        n=2,
        c=np.array([-1.0 * scale, 0.0]),
        c0=c0,
        bound_idx=np.array([0, 1]),
        bound_lo=np.array([0.0, 1e-9]),
        lin_rows=[LinRow(rhs=cap, idx=(1,), coef=(1.0,))] + list(extra_rows),
        delay_rows=[
            DelayRow(
                rhs=rhs,
                lin_idx=(),
                lin_coef=(),
                lin_const=0.0,
                terms=(term,),
                soft_scale=1.0,
            )
        ],
        z0=np.array([0.1, 0.5]),
    )


def test_minimize_qol_analytic():
    params = SolverParams()
    res = barrier.minimize(qol_program(), params)
    assert res.status is Status.OPTIMAL
    assert res.kkt_residual <= params.newton_tol
    assert res.gap_bound <= params.outer_tol_factor * (1 + abs(res.objective)) * (
        1 + 1e-9
    )
    assert res.objective == pytest.approx(-1.0, abs=5e-6)
    assert res.z[0] == pytest.approx(1.0, abs=1e-3)
    assert res.z[1] == pytest.approx(1.0, abs=1e-3)


def test_minimize_constant_offset():
    res = barrier.minimize(qol_program(c0=10.0), SolverParams())
    assert res.objective == pytest.approx(9.0, abs=5e-6)


def test_minimize_linear_row_binding():
    extra = [LinRow(rhs=0.7, idx=(0,), coef=(1.0,))]
    res = barrier.minimize(qol_program(extra_rows=extra), SolverParams())
    assert res.status is Status.OPTIMAL
    assert res.objective == pytest.approx(-0.7, abs=5e-6)
    assert res.z[0] == pytest.approx(0.7, abs=1e-4)


def test_objective_scaling_invariance():
    a = barrier.minimize(qol_program(scale=1.0), SolverParams())
    b = barrier.minimize(qol_program(scale=1000.0), SolverParams())
    assert a.status is b.status is Status.OPTIMAL
    assert b.objective == pytest.approx(1000.0 * a.objective, rel=1e-5)
    assert np.allclose(a.z, b.z, atol=1e-4)


def infeasible_program():
    # x >= 0.5 forces x^2/r >= 0.25 > 0.1, so the delay row cannot hold
    term = QolTerm(coef=1.0, rate=1, w_idx=(0,), w_coef=(1.0,), w_const=0.0)
    return Program(
        n=2,
        c=np.array([-1.0, 0.0]),
        c0=0.0,
        bound_idx=np.array([0, 1]),
        bound_lo=np.array([0.5, 1e-9]),
        lin_rows=[LinRow(rhs=1.0, idx=(1,), coef=(1.0,))],
        delay_rows=[
            DelayRow(
                rhs=0.1,
                lin_idx=(),
                lin_coef=(),
                lin_const=0.0,
                terms=(term,),
                soft_scale=1.0,
            )
        ],
        z0=np.array([0.6, 0.5]),
    )


def test_find_interior_feasible():
    prog = qol_program()
    res = barrier.find_interior(prog, SolverParams())
    assert res.status is Status.OPTIMAL
    assert barrier._Kernel(prog).slacks(res.z) is not None


def test_find_interior_infeasible_certificate():
    res = barrier.find_interior(infeasible_program(), SolverParams())
    assert res.status is Status.INFEASIBLE
    # minimized violation: x^2/r - 0.1 at x=0.5, r=1
    assert res.s_value == pytest.approx(0.15, abs=1e-3)
    assert res.s_value - res.gap_bound > 0


def test_minimize_infeasible_status():
    res = barrier.minimize(infeasible_program(), SolverParams())
    assert res.status is Status.INFEASIBLE
    assert res.z is None and res.objective is None
    assert res.infeasibility > 0


def test_margin_sign_both_ways():
    params = SolverParams()
    feas = barrier.minimize_margin(qol_program(), params, sign_only=True)
    assert feas.objective < 0
    infeas = barrier.minimize_margin(infeasible_program(), params, sign_only=True)
    assert infeas.objective > 0


def _centered_point(prog, mu, params):
    kern = barrier._Kernel(prog)
    sigma = max(1.0, float(np.abs(prog.c).max())) if prog.n else 1.0
    kern.c = prog.c / sigma
    interior = barrier.find_interior(prog, params)
    assert interior.status is Status.OPTIMAL
    z, _, _, _, converged = barrier._center(
        kern, interior.z, mu, params, None, decrement_tol=0.05
    )
    assert converged
    return kern, z


def _fd_gradient_worst(prog, mu=1e-2, h=1e-6):
    params = SolverParams()
    kern, z = _centered_point(prog, mu, params)

    def psi(zz):
        s = kern.slacks(zz)
        assert s is not None, "finite-difference step left the interior"
        return float(kern.c @ zz) + mu * kern.phi(s[0], s[1], s[2])

    s = kern.slacks(z)
    g = kern.c + mu * kern.grad_phi(z, *s)
    worst = 0.0
    for j in range(prog.n):
        zp = z.copy()
        zp[j] += h
        zm = z.copy()
        zm[j] -= h
        fd = (psi(zp) - psi(zm)) / (2 * h)
        worst = max(worst, abs(fd - g[j]) / max(1.0, abs(g[j])))
    return worst


def test_fd_gradient_qol_program():
    assert _fd_gradient_worst(qol_program()) <= 1e-4


def test_fd_gradient_relaxation_program():
    prog = build_relaxed(random_small_instance(11, 3, 2)).program
    assert _fd_gradient_worst(prog) <= 1e-4


def test_delta_phi_matches_direct_difference():
    prog = qol_program()
    params = SolverParams()
    kern, z = _centered_point(prog, 1e-2, params)
    rng = random.Random(5)
    sb, sl, sd, w, r = kern.slacks(z)
    sl, sd = kern.refine_slacks(z, sl, sd, w, r)
    phi0 = kern.phi(sb, sl, sd)
    checked = 0
    for _ in range(30):
        d = np.array([rng.uniform(-1, 1) for _ in range(prog.n)])
        # the cap only covers bound/linear rows; skip draws that cross the
        # delay boundary
        alpha = 0.1 * barrier._step_to_boundary(kern, z, d, sb, sl)
        if not math.isfinite(alpha) or alpha <= 0:
            continue
        zn = z + alpha * d
        sn = kern.slacks(zn)
        if sn is None:
            continue
        direct = kern.phi(sn[0], sn[1], sn[2]) - phi0
        fast = kern.delta_phi(alpha, d, sb, sl, sd, sn, zn)
        assert fast == pytest.approx(direct, rel=1e-9, abs=1e-12)
        checked += 1
    assert checked >= 10


def test_refine_slacks_changes_nothing_large():
    prog = qol_program()
    kern, z = _centered_point(prog, 1e-2, SolverParams())
    sb, sl, sd, w, r = kern.slacks(z)
    rl, rd = kern.refine_slacks(z, sl, sd, w, r)
    # slacks at a mu=1e-2 center are far above the refinement threshold
    assert np.array_equal(rl, sl) and np.array_equal(rd, sd)


def test_kkt_residual_on_relaxations():
    params = SolverParams()
    for seed in (21, 22, 23):
        prog = build_relaxed(random_small_instance(seed, 3, 2)).program
        res = barrier.minimize(prog, params)
        assert res.status is Status.OPTIMAL
        assert res.kkt_residual <= params.newton_tol
