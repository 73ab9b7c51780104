"""Primal log-barrier solver for structured convex programs.

The programs solved here have a linear objective and three row kinds:

* variable lower bounds        ``z_i - lo >= 0``
* linear rows                  ``rhs - a.z >= 0``  (capacity, simplex slack)
* delay rows                   ``rhs - lin.z - const - sum_t c_t w_t^2 / z_{r_t} >= 0``

where each quadratic-over-linear term has an affine numerator ``w_t`` (often a
single variable or a constant) and a positive rate variable denominator.  Each
term's Hessian is the rank-1 matrix (2c/r^3) v v^T with v = r*grad(w) - w*e_r,
so the full barrier Hessian is assembled from diagonals, small outer products
and per-row gradient outers, then factored densely (Cholesky, with a scaled
jitter retry when the factorization fails).

Centering is damped Newton with backtracking line search; the outer loop
shrinks the barrier weight mu geometrically and stops when the duality-gap
bound m*mu falls below ``outer_tol_factor * (1 + |objective|)``.  Feasibility
(phase I) minimizes a shared slack ``s`` attached to the delay rows only; the
start point supplied by the program builder is strictly interior for bounds
and linear rows by construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve


@dataclass
class SolverParams:
    barrier_mu0: float = 1.0
    barrier_shrink: float = 10.0
    newton_tol: float = 1e-8
    outer_tol_factor: float = 1e-7
    max_newton_iters: int = 50
    max_outer_iters: int = 24
    ls_slope: float = 0.25
    ls_shrink: float = 0.5
    rate_floor: float = 1e-9  # lower bound on rate variables, fraction of capacity
    phase1_exit_slack: float = 1e-3  # early-exit margin on delay rows (normalized)
    cholesky_jitter: float = 1e-10
    # gap factor for feasibility-grade solves (phase I, margin, violation):
    # their objectives are violation magnitudes in seconds compared against 0
    # at micro-second precision, so a deeper schedule only adds noise
    margin_tol_factor: float = 1e-6


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITER_LIMIT = "iter_limit"


@dataclass(frozen=True)
class QolTerm:
    coef: float  # c in c * w^2 / r, normalized units
    rate: int  # denominator variable index
    w_idx: Tuple[int, ...] = ()  # affine numerator w = w_const + sum coef*z[idx]
    w_coef: Tuple[float, ...] = ()
    w_const: float = 0.0


@dataclass(frozen=True)
class DelayRow:
    rhs: float
    lin_idx: Tuple[int, ...]
    lin_coef: Tuple[float, ...]
    lin_const: float
    terms: Tuple[QolTerm, ...]
    soft_scale: float  # phase-I slack enters as h + soft_scale * s
    label: object = None


@dataclass(frozen=True)
class LinRow:
    rhs: float
    idx: Tuple[int, ...]
    coef: Tuple[float, ...]
    label: object = None


@dataclass
class Program:
    n: int
    c: np.ndarray
    c0: float
    bound_idx: np.ndarray  # int array
    bound_lo: np.ndarray
    lin_rows: List[LinRow]
    delay_rows: List[DelayRow]
    z0: np.ndarray  # strictly interior for bounds and linear rows

    @property
    def n_constraints(self) -> int:
        return len(self.bound_idx) + len(self.lin_rows) + len(self.delay_rows)


@dataclass
class SolveResult:
    status: Status
    z: Optional[np.ndarray]
    objective: Optional[float]  # includes c0
    kkt_residual: float
    gap_bound: float  # objective units
    mu_final: float
    newton_iters: int
    infeasibility: Optional[float] = None  # phase-I certificate, seconds
    degraded: bool = False  # a stage stalled; result is an earlier certified stage


TraceFn = Callable[[dict], None]


# --- compiled evaluator -------------------------------------------------------


class _Kernel:
    def __init__(self, prog: Program):
        n = prog.n
        self.n = n
        self.c = prog.c.astype(float)
        self.m = prog.n_constraints

        self.bidx = np.asarray(prog.bound_idx, dtype=np.intp)
        self.blo = np.asarray(prog.bound_lo, dtype=float)

        nl = len(prog.lin_rows)
        self.A = np.zeros((nl, n))
        self.b = np.zeros(nl)
        for k, row in enumerate(prog.lin_rows):
            self.A[k, list(row.idx)] = row.coef
            self.b[k] = row.rhs

        rows = prog.delay_rows
        nd = len(rows)
        self.nd = nd
        self.d_rhs = np.array([r.rhs - r.lin_const for r in rows])
        self.d_rhs_raw = np.array([r.rhs for r in rows])
        self.d_linconst = np.array([r.lin_const for r in rows])
        self.D = np.zeros((nd, n))
        for k, row in enumerate(rows):
            if row.lin_idx:
                self.D[k, list(row.lin_idx)] = row.lin_coef

        terms = [(k, t) for k, row in enumerate(rows) for t in row.terms]
        nt = len(terms)
        self.nt = nt
        self.t_row = np.array([k for k, _ in terms], dtype=np.intp)
        self.t_coef = np.array([t.coef for _, t in terms])
        self.t_rate = np.array([t.rate for _, t in terms], dtype=np.intp)
        self.w0 = np.array([t.w_const for _, t in terms])
        self.W = np.zeros((nt, n))
        for k, (_, t) in enumerate(terms):
            if t.w_idx:
                self.W[k, list(t.w_idx)] = t.w_coef
        # term classes for Hessian assembly
        is_const = np.array([len(t.w_idx) == 0 for _, t in terms], dtype=bool)
        is_single = np.array([len(t.w_idx) == 1 for _, t in terms], dtype=bool)
        self.tA = np.nonzero(is_const)[0]
        self.tB = np.nonzero(is_single)[0]
        self.tC = np.nonzero(~is_const & ~is_single)[0]
        self.tB_w = np.array(
            [terms[k][1].w_idx[0] for k in self.tB], dtype=np.intp
        )
        self.tB_a = np.array([terms[k][1].w_coef[0] for k in self.tB])
        self.tB_r = self.t_rate[self.tB]
        # flat scatter indices for the 2x2 blocks of single-variable terms
        self.tB_ww = self.tB_w * n + self.tB_w
        self.tB_wr = self.tB_w * n + self.tB_r
        self.tB_rw = self.tB_r * n + self.tB_w
        self.tB_rr = self.tB_r * n + self.tB_r
        # class-C terms (affine numerators): flat scatter of v = r*grad(w) - w*e_r
        tC_i: List[int] = []  # ordinal of the class-C term
        tC_j: List[int] = []  # variable index of the numerator entry
        tC_a: List[float] = []  # numerator coefficient
        for ord_k, k in enumerate(self.tC):
            t = terms[k][1]
            for vi, vc in zip(t.w_idx, t.w_coef):
                tC_i.append(ord_k)
                tC_j.append(vi)
                tC_a.append(vc)
        self.tC_i = np.array(tC_i, dtype=np.intp)
        self.tC_j = np.array(tC_j, dtype=np.intp)
        self.tC_a = np.array(tC_a)
        self.tC_rate = self.t_rate[self.tC]
        self.tC_row = self.t_row[self.tC]
        self.tC_coef = self.t_coef[self.tC]
        self.row_terms = [np.nonzero(self.t_row == k)[0] for k in range(nd)]

    # slack evaluation; returns None if not strictly interior
    def slacks(self, z: np.ndarray):
        sb = z[self.bidx] - self.blo
        sl = self.b - self.A @ z
        if self.nt:
            w = self.w0 + self.W @ z
            r = z[self.t_rate]
            if np.any(r <= 0):
                return None
            q = self.t_coef * w * w / r
            load = np.zeros(self.nd, dtype=q.dtype)
            np.add.at(load, self.t_row, q)
        else:
            w = np.zeros(0)
            r = np.zeros(0)
            q = np.zeros(0)
            load = np.zeros(self.nd)
        sd = self.d_rhs - self.D @ z - load
        if (len(sb) and sb.min() <= 0) or (len(sl) and sl.min() <= 0) or (
            len(sd) and sd.min() <= 0
        ):
            return None
        return sb, sl, sd, w, r

    def refine_slacks(self, z, sl, sd, w, r, threshold: float = 1e-6):
        """Recompute near-zero linear/delay slacks with compensated summation.

        A slack of ~1e-10 assembled from O(1) terms carries ~1e-16 absolute
        rounding noise, a relative error large enough to swamp the Newton
        gradient through the 1/s barrier weight.  Bound slacks subtract
        nearly equal numbers and stay exact, so only these two kinds need it.
        """
        if len(sl):
            small = np.nonzero(sl < threshold)[0]
            if len(small):
                sl = sl.copy()
                for k in small:
                    ak = self.A[k]
                    parts = [self.b[k]]
                    parts.extend(-ak[j] * z[j] for j in np.nonzero(ak)[0])
                    v = math.fsum(parts)
                    if v > 0:
                        sl[k] = v
        if self.nd:
            small = np.nonzero(sd < threshold)[0]
            if len(small):
                sd = sd.copy()
                for k in small:
                    dk = self.D[k]
                    parts = [self.d_rhs_raw[k], -self.d_linconst[k]]
                    parts.extend(-dk[j] * z[j] for j in np.nonzero(dk)[0])
                    parts.extend(
                        -self.t_coef[t] * w[t] * w[t] / r[t]
                        for t in self.row_terms[k]
                    )
                    v = math.fsum(parts)
                    if v > 0:
                        sd[k] = v
        return sl, sd

    def phi(self, sb, sl, sd) -> float:
        total = 0.0
        for s in (sb, sl, sd):
            if len(s):
                total -= np.log(s).sum()
        return total

    def delta_phi(self, alpha, d, sb, sl, sd, sn, zn):
        """phi(z + alpha*d) - phi(z) without evaluating either phi.

        Near convergence the decrease tested by the line search is far below
        the rounding error of phi itself, so it is assembled from per-row
        ratios instead: bound and linear slacks shift linearly in alpha
        (log1p is exact-ish), and delay slacks are re-refined at the trial
        point.  ``sl``/``sd`` must already be refined.
        """
        total = 0.0
        if len(sb):
            total -= float(np.log1p(alpha * d[self.bidx] / sb).sum())
        if len(sl):
            total -= float(np.log1p(-alpha * (self.A @ d) / sl).sum())
        if self.nd:
            sdn = sn[2]
            _, sdn = self.refine_slacks(zn, sn[1], sdn, sn[3], sn[4])
            total -= float((np.log(sdn) - np.log(sd)).sum())
        return total

    def grad_phi(self, z, sb, sl, sd, w, r) -> np.ndarray:
        g = np.zeros(self.n, dtype=z.dtype)
        if len(self.bidx):
            np.add.at(g, self.bidx, -1.0 / sb)
        if len(sl):
            g += self.A.T @ (1.0 / sl)
        if self.nd:
            inv_sd = 1.0 / sd
            g += self.D.T @ inv_sd
            if self.nt:
                hrow = inv_sd[self.t_row]
                g += self.W.T @ (2.0 * self.t_coef * w / r * hrow)
                np.add.at(g, self.t_rate, -self.t_coef * w * w / (r * r) * hrow)
        return g

    def hess_phi(self, z, sb, sl, sd, w, r) -> np.ndarray:
        n = self.n
        H = np.zeros((n, n))
        diag = np.zeros(n)
        if len(self.bidx):
            np.add.at(diag, self.bidx, 1.0 / (sb * sb))
        if len(sl):
            As = self.A / sl[:, None]
            H += As.T @ As
        if self.nd:
            inv_sd = 1.0 / sd
            # curvature of each QoL term, weighted by 1/h of its row
            if len(self.tA):
                k = self.tA
                hr = inv_sd[self.t_row[k]]
                np.add.at(
                    diag,
                    self.t_rate[k],
                    2.0 * self.t_coef[k] * self.w0[k] ** 2 / r[k] ** 3 * hr,
                )
            if len(self.tB):
                k = self.tB
                hr = inv_sd[self.t_row[k]]
                cw = self.t_coef[k]
                wk = w[k]
                rk = r[k]
                ak = self.tB_a
                hww = 2.0 * cw * ak * ak / rk * hr
                hwr = -2.0 * cw * ak * wk / (rk * rk) * hr
                hrr = 2.0 * cw * wk * wk / (rk * rk * rk) * hr
                flat = H.ravel()
                np.add.at(flat, self.tB_ww, hww)
                np.add.at(flat, self.tB_wr, hwr)
                np.add.at(flat, self.tB_rw, hwr)
                np.add.at(flat, self.tB_rr, hrr)
            if len(self.tC):
                V = np.zeros((len(self.tC), n))
                V[self.tC_i, self.tC_j] = r[self.tC][self.tC_i] * self.tC_a
                V[np.arange(len(self.tC)), self.tC_rate] = -w[self.tC]
                scale = 2.0 * self.tC_coef / r[self.tC] ** 3 * inv_sd[self.tC_row]
                H += (V * scale[:, None]).T @ V
            # per-row constraint gradients, then their outer products
            G = self.D.copy()
            if self.nt:
                np.add.at(G, self.t_row, (2.0 * self.t_coef * w / r)[:, None] * self.W)
                np.add.at(G, (self.t_row, self.t_rate), -self.t_coef * w * w / (r * r))
            Gs = G * inv_sd[:, None]
            H += Gs.T @ Gs
        H[np.diag_indices(n)] += diag
        return H


# --- public evaluation helpers (used by numerics tests) -----------------------


def barrier_value(prog: Program, z: np.ndarray, mu: float) -> float:
    """f(z) + mu * phi(z) for the program's barrier objective."""
    kern = _Kernel(prog)
    s = kern.slacks(z)
    if s is None:
        raise ValueError("point is not strictly interior")
    sb, sl, sd, _, _ = s
    return float(prog.c @ z + mu * kern.phi(sb, sl, sd))


def barrier_grad(prog: Program, z: np.ndarray, mu: float) -> np.ndarray:
    kern = _Kernel(prog)
    s = kern.slacks(z)
    if s is None:
        raise ValueError("point is not strictly interior")
    sb, sl, sd, w, r = s
    return prog.c + mu * kern.grad_phi(z, sb, sl, sd, w, r)


# --- Newton centering ---------------------------------------------------------


def _solve_spd(H: np.ndarray, rhs: np.ndarray, jitter: float) -> Optional[np.ndarray]:
    """Solve H x = rhs with H symmetric positive definite.

    Barrier Hessians near convergence mix curvatures of order 1/mu^2 with
    O(1) ones; Jacobi equilibration keeps the factorization's pivots at unit
    scale so that breakdown bumps stay meaningful for any mu.
    """
    dg = np.sqrt(np.abs(np.diag(H)))
    dg[dg == 0] = 1.0
    dinv = 1.0 / dg
    Hs = H * dinv[:, None] * dinv[None, :]
    bump = 0.0
    for _ in range(6):
        try:
            cf = cho_factor(Hs + bump * np.eye(Hs.shape[0]), lower=True)
            return cho_solve(cf, rhs * dinv) * dinv
        except LinAlgError:
            bump = jitter if bump == 0.0 else bump * 100.0
    return None


def _step_to_boundary(kern: _Kernel, z: np.ndarray, d: np.ndarray, sb, sl) -> float:
    """Largest step keeping the bound and linear slacks positive (exact)."""
    alpha = math.inf
    if len(kern.bidx):
        db = d[kern.bidx]
        shrinking = db < 0
        if shrinking.any():
            alpha = min(alpha, float((sb[shrinking] / -db[shrinking]).min()))
    if len(sl):
        ad = kern.A @ d
        growing = ad > 0
        if growing.any():
            alpha = min(alpha, float((sl[growing] / ad[growing]).min()))
    return alpha


def _center(
    kern: _Kernel,
    z: np.ndarray,
    mu: float,
    params: SolverParams,
    stop_early: Optional[Callable[[np.ndarray], bool]] = None,
    decrement_tol: float = 0.25,
) -> Tuple[np.ndarray, float, int, bool, bool]:
    """Damped Newton toward the mu-center.

    Stops when the gradient norm reaches ``newton_tol`` or the Newton
    decrement of f/mu + phi falls to ``decrement_tol`` (pass 0 to insist on
    the gradient norm alone).  The decrement is the conditioning-independent
    measure: near-active constraints put a cancellation floor under the
    achievable gradient norm, but a small decrement still certifies
    near-centeredness.  Returns (z, grad_inf, iters, early, converged).
    """
    c = kern.c
    gnorm = math.inf
    best_z, best_g, best_it = z, math.inf, 0
    for it in range(params.max_newton_iters):
        s = kern.slacks(z)
        if s is None:
            raise RuntimeError("lost strict feasibility during centering")
        sb, sl, sd, w, r = s
        if stop_early is not None and stop_early(z):
            return z, math.inf, it, True, True
        tight = (len(sl) and sl.min() < 1e-6) or (len(sd) and sd.min() < 1e-6)
        if tight:
            sl, sd = kern.refine_slacks(z, sl, sd, w, r)
        g = c + mu * kern.grad_phi(z, sb, sl, sd, w, r)
        gnorm = float(np.abs(g).max()) if len(g) else 0.0
        if gnorm < best_g:
            best_z, best_g, best_it = z, gnorm, it
        if gnorm <= params.newton_tol:
            return z, gnorm, it, False, True
        if (
            decrement_tol == 0
            and best_g < max(1e-6, 100.0 * params.newton_tol)
            and it - best_it >= 10
        ):
            # endgame is wandering on the rounding lattice; keep the best
            # iterate rather than burning the whole budget
            return best_z, best_g, it, False, False
        B = kern.hess_phi(z, sb, sl, sd, w, r)
        d = _solve_spd(B, -g / mu, params.cholesky_jitter)
        if d is None:
            return best_z, best_g, it, False, False
        slope = float(g @ d)
        if slope >= 0:  # not a descent direction (numerical); bail out
            return best_z, best_g, it, False, False
        if decrement_tol > 0 and math.sqrt(-slope) / mu <= decrement_tol:
            return z, gnorm, it, False, True
        psi0 = float(c @ z) + mu * kern.phi(sb, sl, sd)
        alpha = min(1.0, 0.99 * _step_to_boundary(kern, z, d, sb, sl))
        accepted = False
        while alpha > 1e-16:
            zn = z + alpha * d
            sn = kern.slacks(zn)
            if sn is not None:
                if tight:
                    # the tested decrease may be below phi's own rounding
                    # error, so compare an exactly assembled difference
                    dpsi = alpha * float(c @ d) + mu * kern.delta_phi(
                        alpha, d, sb, sl, sd, sn, zn
                    )
                else:
                    psin = float(c @ zn) + mu * kern.phi(sn[0], sn[1], sn[2])
                    dpsi = psin - psi0
                if dpsi <= params.ls_slope * alpha * slope:
                    z = zn
                    accepted = True
                    break
            alpha *= params.ls_shrink
        if not accepted:
            return best_z, best_g, it, False, False
    return best_z, best_g, params.max_newton_iters, False, False


def _polish(kern: _Kernel, z: np.ndarray, mu: float, params: SolverParams):
    """Endgame Newton steps with extended-precision iterates.

    Near the gap target the mu-center can fall between adjacent double
    values: one ulp of z moves an active slack's dual by more than
    ``newton_tol``, so no double iterate reaches the tolerance.  Holding z
    (and the residual evaluation) in long double restores the missing
    digits; directions still come from the double Cholesky.  Returns the
    iterate with the smallest gradient norm seen.
    """
    ld = np.longdouble
    z = z.astype(ld)
    best_z, best_g = z, math.inf
    for _ in range(12):
        s = kern.slacks(z)
        if s is None:
            break
        sb, sl, sd, w, r = s
        g = kern.c + mu * kern.grad_phi(z, sb, sl, sd, w, r)
        gnorm = float(np.abs(g).max()) if len(g) else 0.0
        if gnorm < best_g:
            best_z, best_g = z, gnorm
        if gnorm <= 0.2 * params.newton_tol:
            break
        B = kern.hess_phi(z, sb, sl, sd, w, r)
        d = _solve_spd(B, (-g / mu).astype(float), params.cholesky_jitter)
        if d is None:
            break
        d = d.astype(ld)
        alpha = min(1.0, 0.99 * _step_to_boundary(kern, z, d, sb, sl))
        zn = z + alpha * d
        if kern.slacks(zn) is None:
            break
        z = zn
    return best_z, best_g


# --- phase I ------------------------------------------------------------------


def soften(prog: Program) -> Tuple[Program, int]:
    """Append a shared slack variable to every delay row: h + soft_scale*s >= 0.

    Returns the softened program (objective = s) and the slack's index.  The
    start point sets s so all delay rows are strictly slack.
    """
    n = prog.n
    s_idx = n
    rows = []
    worst = 0.0
    kern = _Kernel(prog)
    z = prog.z0
    if prog.delay_rows:
        sb_ok = kern.slacks(z)
        if sb_ok is None:
            # compute delay loads directly to size s0 (bounds/lin are interior)
            if kern.nt:
                w = kern.w0 + kern.W @ z
                r = z[kern.t_rate]
                q = kern.t_coef * w * w / r
                load = np.zeros(kern.nd)
                np.add.at(load, kern.t_row, q)
            else:
                load = np.zeros(kern.nd)
            sd = kern.d_rhs - kern.D @ z - load
        else:
            sd = sb_ok[2]
        for k, row in enumerate(prog.delay_rows):
            worst = max(worst, -float(sd[k]) / row.soft_scale)
    for row in prog.delay_rows:
        rows.append(
            replace(
                row,
                lin_idx=row.lin_idx + (s_idx,),
                lin_coef=row.lin_coef + (-row.soft_scale,),
            )
        )
    c = np.zeros(n + 1)
    c[s_idx] = 1.0
    z0 = np.concatenate([prog.z0, [worst + 1.0]])
    soft = Program(
        n=n + 1,
        c=c,
        c0=0.0,
        bound_idx=prog.bound_idx,
        bound_lo=prog.bound_lo,
        lin_rows=prog.lin_rows,
        delay_rows=rows,
        z0=z0,
    )
    return soft, s_idx


def soften_per_row(prog: Program) -> Tuple[Program, List[int]]:
    """Per-row violation variables v_k >= 0; objective sum of v (seconds)."""
    n = prog.n
    v_idx = list(range(n, n + len(prog.delay_rows)))
    rows = []
    kern = _Kernel(prog)
    z = prog.z0
    if kern.nt:
        w = kern.w0 + kern.W @ z
        r = z[kern.t_rate]
        q = kern.t_coef * w * w / r
        load = np.zeros(kern.nd)
        np.add.at(load, kern.t_row, q)
    else:
        load = np.zeros(kern.nd)
    sd = kern.d_rhs - kern.D @ z - load
    v0 = []
    for k, row in enumerate(prog.delay_rows):
        rows.append(
            replace(
                row,
                lin_idx=row.lin_idx + (v_idx[k],),
                lin_coef=row.lin_coef + (-row.soft_scale,),
            )
        )
        v0.append(max(0.0, -float(sd[k]) / row.soft_scale) + 1.0)
    nv = len(v_idx)
    c = np.zeros(n + nv)
    c[n:] = 1.0
    soft = Program(
        n=n + nv,
        c=c,
        c0=0.0,
        bound_idx=np.concatenate([prog.bound_idx, np.array(v_idx, dtype=np.intp)]),
        bound_lo=np.concatenate([prog.bound_lo, np.zeros(nv)]),
        lin_rows=prog.lin_rows,
        delay_rows=rows,
        z0=np.concatenate([prog.z0, v0]),
    )
    return soft, v_idx


# --- barrier outer loop -------------------------------------------------------


def _barrier_loop(
    prog: Program,
    params: SolverParams,
    z: np.ndarray,
    trace: Optional[TraceFn],
    phase: str,
    stop_early: Optional[Callable[[np.ndarray], bool]] = None,
    strict_final: bool = True,
    tol_factor: Optional[float] = None,
    stage_stop: Optional[Callable[[np.ndarray, float], bool]] = None,
) -> Tuple[Status, np.ndarray, float, float, int, bool, bool]:
    """Shared mu-schedule.  Returns (status, z, kkt, mu, iters, early, degraded).

    With ``strict_final`` the last stage must drive the gradient norm below
    ``newton_tol``; otherwise a tiny Newton decrement is accepted, which keeps
    the (m+1)*mu gap bound valid even when large duals make the gradient norm
    bottom out above the tolerance.  Stalls degrade gracefully: if a stage
    fails to center (degenerate optimal faces with large duals can exhaust
    double precision mid-schedule), the last converged stage is returned as
    optimal with its own, wider gap bound.
    """
    kern = _Kernel(prog)
    sigma = max(1.0, float(np.abs(prog.c).max())) if prog.n else 1.0
    kern.c = prog.c / sigma
    m = prog.n_constraints
    mu = params.barrier_mu0
    total_iters = 0
    kkt = math.inf
    factor = params.outer_tol_factor if tol_factor is None else tol_factor
    best: Optional[Tuple[np.ndarray, float, float]] = None
    for outer in range(params.max_outer_iters):
        f_full = float(kern.c @ z) * sigma + prog.c0
        final = (m + 1) * mu * sigma <= factor * (1.0 + abs(f_full))
        dec_tol = (0.0 if strict_final else 0.01) if final else 0.05
        z, kkt, iters, early, converged = _center(
            kern, z, mu, params, stop_early, decrement_tol=dec_tol
        )
        total_iters += iters
        if trace is not None:
            trace(
                {
                    "phase": phase,
                    "mu": mu,
                    "objective": float(prog.c @ z + prog.c0),
                    "grad_norm": kkt,
                    "newton_iters": iters,
                }
            )
        if early:
            return Status.OPTIMAL, z, kkt, mu, total_iters, True, False
        if not converged:
            if final and strict_final:
                zp, kp = _polish(kern, z, mu, params)
                if kp <= params.newton_tol:
                    return Status.OPTIMAL, zp, kp, mu, total_iters, False, False
                z, kkt = zp, kp
            if best is not None:
                # the stalled stage is uncertified, but the previous one
                # converged and its (m+1)*mu*sigma gap still stands
                zb, kb, mb = best
                return Status.OPTIMAL, zb, kb, mb, total_iters, False, True
            return Status.ITER_LIMIT, z, kkt, mu, total_iters, False, False
        if final or (stage_stop is not None and stage_stop(z, mu)):
            return Status.OPTIMAL, z, kkt, mu, total_iters, False, False
        best = (z.copy(), kkt, mu)
        mu /= params.barrier_shrink
        # never shrink past the gap target: centering accuracy in double
        # precision degrades as mu falls, so the final stage runs at the
        # largest mu the tolerance allows (0.99: keep the trigger true under
        # rounding and small objective drift)
        mu_star = 0.99 * factor * (1.0 + abs(f_full)) / ((m + 1) * sigma)
        if mu < mu_star:
            mu = mu_star
    if best is not None:
        zb, kb, mb = best
        return Status.OPTIMAL, zb, kb, mb, total_iters, False, True
    return Status.ITER_LIMIT, z, kkt, mu, total_iters, False, False


def _result(
    prog: Program, status: Status, z, kkt, mu, iters, infeasibility=None, degraded=False
) -> SolveResult:
    sigma = max(1.0, float(np.abs(prog.c).max())) if prog.n else 1.0
    obj = float(prog.c @ z + prog.c0) if z is not None else None
    return SolveResult(
        status=status,
        z=z,
        objective=obj,
        kkt_residual=kkt,
        gap_bound=(prog.n_constraints + 1) * mu * sigma,
        mu_final=mu,
        newton_iters=iters,
        infeasibility=infeasibility,
        degraded=degraded,
    )


@dataclass
class InteriorResult:
    status: Status  # OPTIMAL = interior point found
    z: Optional[np.ndarray]
    s_value: Optional[float]  # minimized max violation, seconds (None if early)
    gap_bound: float = 0.0


def find_interior(
    prog: Program,
    params: SolverParams,
    trace: Optional[TraceFn] = None,
    early_exit: bool = True,
) -> InteriorResult:
    """Find a strictly interior point, or certify infeasibility.

    Already-interior start points are returned unchanged.  Otherwise the
    shared-slack phase-I program is minimized; with ``early_exit`` the solve
    stops as soon as every delay row has normalized slack of at least
    ``params.phase1_exit_slack``.
    """
    if prog.n == 0:
        return InteriorResult(Status.OPTIMAL, prog.z0.copy(), None)
    kern = _Kernel(prog)
    if kern.slacks(prog.z0) is not None:
        return InteriorResult(Status.OPTIMAL, prog.z0.copy(), None)
    soft, s_idx = soften(prog)

    stop = None
    if early_exit:
        margin = params.phase1_exit_slack

        def stop(zs: np.ndarray) -> bool:
            s = kern.slacks(zs[:s_idx])
            if s is None:
                return False
            sd = s[2]
            return len(sd) == 0 or float(sd.min()) >= margin

    status, zs, kkt, mu, iters, early, _ = _barrier_loop(
        soft,
        params,
        soft.z0.copy(),
        trace,
        "phase1",
        stop,
        strict_final=False,
        tol_factor=params.margin_tol_factor,
    )
    if early:
        return InteriorResult(Status.OPTIMAL, zs[:s_idx], None)
    s_rep = float(zs[s_idx])
    gap = (soft.n_constraints + 1) * mu  # objective is s, already in seconds
    if status is Status.ITER_LIMIT:
        return InteriorResult(Status.ITER_LIMIT, None, s_rep, gap)
    if s_rep - gap > 0:
        return InteriorResult(Status.INFEASIBLE, None, s_rep, gap)
    if s_rep <= 0 and kern.slacks(zs[:s_idx]) is not None:
        return InteriorResult(Status.OPTIMAL, zs[:s_idx], s_rep, gap)
    # |s*| below the certification gap: cannot answer either way
    return InteriorResult(Status.ITER_LIMIT, None, s_rep, gap)


def minimize(
    prog: Program, params: SolverParams, trace: Optional[TraceFn] = None
) -> SolveResult:
    """Phase I + phase II barrier minimization of the program."""
    if prog.n == 0:
        return SolveResult(
            status=Status.OPTIMAL,
            z=prog.z0.copy(),
            objective=prog.c0,
            kkt_residual=0.0,
            gap_bound=0.0,
            mu_final=0.0,
            newton_iters=0,
        )
    interior = find_interior(prog, params, trace)
    if interior.status is Status.INFEASIBLE:
        return SolveResult(
            status=Status.INFEASIBLE,
            z=None,
            objective=None,
            kkt_residual=math.inf,
            gap_bound=interior.gap_bound,
            mu_final=0.0,
            newton_iters=0,
            infeasibility=interior.s_value,
        )
    if interior.status is Status.ITER_LIMIT:
        return SolveResult(
            status=Status.ITER_LIMIT,
            z=None,
            objective=None,
            kkt_residual=math.inf,
            gap_bound=interior.gap_bound,
            mu_final=0.0,
            newton_iters=0,
            infeasibility=interior.s_value,
        )
    status, z, kkt, mu, iters, _, degraded = _barrier_loop(
        prog, params, interior.z, trace, "phase2"
    )
    return _result(prog, status, z, kkt, mu, iters, degraded=degraded)


def minimize_margin(
    prog: Program,
    params: SolverParams,
    trace: Optional[TraceFn] = None,
    sign_only: bool = False,
) -> SolveResult:
    """Minimize the shared delay slack s (max-margin).

    The returned objective is s* in seconds (up to ``gap_bound``); ``z``
    covers the original variables followed by s.  With ``sign_only`` the
    schedule stops at the first stage whose center settles the sign of s*:
    a strictly negative s gives feasible rates outright, and s above the
    stage's gap bound certifies s* > 0.
    """
    soft, s_idx = soften(prog)
    stage_stop = None
    if sign_only:
        gap_per_mu = soft.n_constraints + 1

        def stage_stop(zs: np.ndarray, mu: float) -> bool:
            s = float(zs[s_idx])
            return s < 0.0 or s - gap_per_mu * mu > 0.0

    status, z, kkt, mu, iters, _, degraded = _barrier_loop(
        soft,
        params,
        soft.z0.copy(),
        trace,
        "margin",
        strict_final=False,
        tol_factor=params.margin_tol_factor,
        stage_stop=stage_stop,
    )
    return _result(soft, status, z, kkt, mu, iters, degraded=degraded)


def minimize_total_violation(
    prog: Program, params: SolverParams, trace: Optional[TraceFn] = None
) -> SolveResult:
    """Minimize the sum of per-row deadline violations (seconds)."""
    soft, _ = soften_per_row(prog)
    status, z, kkt, mu, iters, _, degraded = _barrier_loop(
        soft,
        params,
        soft.z0.copy(),
        trace,
        "violation",
        strict_final=False,
        tol_factor=params.margin_tol_factor,
    )
    return _result(soft, status, z, kkt, mu, iters, degraded=degraded)
