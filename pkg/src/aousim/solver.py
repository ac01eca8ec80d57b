"""Log-barrier interior-point solver for the round programs.

Standard path following: minimize t*f(x) + phi(x) by damped Newton with
backtracking, multiply t by barrier_mu until the certified gap m_total/t
drops below the tolerance.  Box bounds enter the barrier like any other
inequality, so there is a single code path and the barrier Hessian is always
positive definite (every coordinate carries at least its bound curvature).

Centering stops when half the squared Newton decrement falls below
newton_tol, which bounds the centering suboptimality by the same amount.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .program import ConvexProgram, DecisionVector


class SolverError(RuntimeError):
    pass


class LineSearchError(SolverError):
    """Backtracking could not find an acceptable step; carries the iterate."""

    def __init__(self, msg: str, x: np.ndarray, t_barrier: float):
        super().__init__(f"{msg} (t={t_barrier:.3e}, iterate dump: {np.array2string(x, precision=6, threshold=20)})")
        self.x = x
        self.t_barrier = t_barrier


class InfeasibleError(SolverError):
    """Phase-I certified that no strictly feasible point exists."""


@dataclass(frozen=True)
class SolveOptions:
    duality_gap_tol: float = 1e-6
    newton_tol: float = 1e-8
    barrier_mu: float = 10.0
    t0: float = 1.0
    backtrack_alpha: float = 0.25
    backtrack_beta: float = 0.5
    max_newton: int = 200
    max_outer: int = 60

    def __post_init__(self):
        if not 0 < self.backtrack_alpha < 0.5:
            raise ValueError("backtrack_alpha must be in (0, 0.5)")
        if not 0 < self.backtrack_beta < 1:
            raise ValueError("backtrack_beta must be in (0, 1)")
        if self.barrier_mu <= 1:
            raise ValueError("barrier_mu must be > 1")
        if self.duality_gap_tol <= 0 or self.newton_tol <= 0 or self.t0 <= 0:
            raise ValueError("tolerances and t0 must be > 0")


@dataclass
class SolveResult:
    x: np.ndarray
    objective: float
    gap_bound: float
    kkt_residual: float
    outer_iters: int
    newton_iters: int
    objective_trace: list[float]
    status: str                      # optimal | infeasible | max_iters
    outer_rows: list[tuple] = field(default_factory=list)
    decrements: list[float] = field(default_factory=list)

    def decision_vector(self, program: ConvexProgram, a_prev) -> DecisionVector:
        return DecisionVector.from_flat(self.x, program.packing, a_prev)


@dataclass
class PhaseOneResult:
    x: np.ndarray
    feasible: bool
    max_violation: float
    outer_iters: int
    newton_iters: int


# ---------------------------------------------------------------------------
# Barrier machinery
# ---------------------------------------------------------------------------

class _Barrier:
    """Vectorized barrier value/gradient/Hessian over one program."""

    def __init__(self, program):
        self.p = program
        self.lo = np.asarray(program.bounds_lo, dtype=float)
        self.hi = np.asarray(program.bounds_hi, dtype=float)
        self.lo_idx = np.nonzero(np.isfinite(self.lo))[0]
        self.hi_idx = np.nonzero(np.isfinite(self.hi))[0]
        self.m_total = program.m + self.lo_idx.size + self.hi_idx.size

    def in_domain(self, x: np.ndarray) -> bool:
        if np.any(x[self.lo_idx] <= self.lo[self.lo_idx]):
            return False
        if np.any(x[self.hi_idx] >= self.hi[self.hi_idx]):
            return False
        vals = self.p.constraint_values(x)
        return bool(np.all(np.isfinite(vals)) and np.all(vals < 0))

    def value(self, x: np.ndarray, t: float) -> float:
        lo_gap = x[self.lo_idx] - self.lo[self.lo_idx]
        hi_gap = self.hi[self.hi_idx] - x[self.hi_idx]
        if np.any(lo_gap <= 0) or np.any(hi_gap <= 0):
            return math.inf
        vals = self.p.constraint_values(x)
        if not (np.all(np.isfinite(vals)) and np.all(vals < 0)):
            return math.inf
        return (t * self.p.objective_value(x)
                - float(np.sum(np.log(-vals)))
                - float(np.sum(np.log(lo_gap)))
                - float(np.sum(np.log(hi_gap))))

    def grad_hess(self, x: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Gradient and Hessian of t*f + phi at a domain point."""
        n = x.shape[0]
        g = t * self.p.obj_lin.copy()
        H = np.zeros((n, n))
        for block in self.p.blocks:
            vals = block.values(x)
            cols, gvals = block.grads(x)
            w_lin = -1.0 / vals                      # barrier gradient weights
            w_quad = 1.0 / vals**2
            np.add.at(g, cols, w_lin[:, None] * gvals)
            outer = w_quad[:, None, None] * gvals[:, :, None] * gvals[:, None, :]
            np.add.at(H, (cols[:, :, None], cols[:, None, :]), outer)
            hc = block.hess_compact(x, w_lin)
            if hc is not None:
                hcols, hblocks = hc
                np.add.at(H, (hcols[:, :, None], hcols[:, None, :]), hblocks)
        lo_gap = x[self.lo_idx] - self.lo[self.lo_idx]
        hi_gap = self.hi[self.hi_idx] - x[self.hi_idx]
        np.add.at(g, self.lo_idx, -1.0 / lo_gap)
        np.add.at(g, self.hi_idx, 1.0 / hi_gap)
        diag = np.zeros(n)
        np.add.at(diag, self.lo_idx, 1.0 / lo_gap**2)
        np.add.at(diag, self.hi_idx, 1.0 / hi_gap**2)
        H[np.diag_indices(n)] += diag
        return g, H


def _newton_step(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    try:
        c = scipy.linalg.cho_factor(H, check_finite=False)
        return scipy.linalg.cho_solve(c, -g, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError):
        reg = H + 1e-10 * np.eye(H.shape[0])
        return np.linalg.solve(reg, -g)


def _center(barrier: _Barrier, x: np.ndarray, t: float, opts: SolveOptions,
            decrements: list[float] | None = None) -> tuple[np.ndarray, int]:
    """Damped Newton to the central point at barrier weight t."""
    steps = 0
    for _ in range(opts.max_newton):
        g, H = barrier.grad_hess(x, t)
        dx = _newton_step(H, g)
        lam_sq = float(-g @ dx)
        if not math.isfinite(lam_sq):
            raise SolverError("Newton system produced a non-finite decrement")
        if decrements is not None:
            decrements.append(math.sqrt(max(lam_sq, 0.0)))
        if lam_sq / 2.0 <= opts.newton_tol:
            return x, steps
        phi0 = barrier.value(x, t)
        slope = float(g @ dx)
        step = 1.0
        while True:
            cand = x + step * dx
            phi_c = barrier.value(cand, t)
            if phi_c <= phi0 + opts.backtrack_alpha * step * slope:
                break
            step *= opts.backtrack_beta
            if step < 1e-20:
                raise LineSearchError("backtracking line search failed", x, t)
        x = cand
        steps += 1
    return x, steps


def strictly_feasible(program, x: np.ndarray, margin: float = 0.0) -> bool:
    """True when x sits strictly inside bounds and every inequality."""
    lo = np.asarray(program.bounds_lo, dtype=float)
    hi = np.asarray(program.bounds_hi, dtype=float)
    lo_ok = np.all(x[np.isfinite(lo)] > lo[np.isfinite(lo)])
    hi_ok = np.all(x[np.isfinite(hi)] < hi[np.isfinite(hi)])
    if not (lo_ok and hi_ok):
        return False
    vals = program.constraint_values(x)
    if vals.size == 0:
        return True
    return bool(np.all(np.isfinite(vals))
                and np.all(vals < -margin * (1.0 + np.abs(vals))))


def solve(program, x0: np.ndarray, opts: SolveOptions | None = None) -> SolveResult:
    """Barrier path following from a strictly feasible start."""
    opts = opts or SolveOptions()
    if not strictly_feasible(program, x0):
        raise SolverError("solve() requires a strictly feasible starting point")
    barrier = _Barrier(program)
    x = np.array(x0, dtype=float)
    t = opts.t0
    trace: list[float] = []
    rows: list[tuple] = []
    decrements: list[float] = []
    newton_total = 0
    status = "max_iters"
    outer = 0
    t_used = t
    for outer in range(1, opts.max_outer + 1):
        t_used = t
        x, steps = _center(barrier, x, t, opts, decrements)
        newton_total += steps
        obj = program.objective_value(x)
        trace.append(obj)
        g, _ = barrier.grad_hess(x, t)
        kkt = float(np.linalg.norm(g)) / t
        rows.append((outer, t, obj, steps, kkt))
        if barrier.m_total / t <= opts.duality_gap_tol:
            status = "optimal"
            break
        t *= opts.barrier_mu
    g, _ = barrier.grad_hess(x, t_used)
    return SolveResult(
        x=x,
        objective=program.objective_value(x),
        gap_bound=barrier.m_total / t_used,
        kkt_residual=float(np.linalg.norm(g)) / t_used,
        outer_iters=outer,
        newton_iters=newton_total,
        objective_trace=trace,
        status=status,
        outer_rows=rows,
        decrements=decrements,
    )


# ---------------------------------------------------------------------------
# Phase-I
# ---------------------------------------------------------------------------

class _ShiftedBlock:
    """g_j(x) - s over the augmented vector (x, s)."""

    def __init__(self, inner, s_col: int):
        self.inner = inner
        self.s_col = s_col
        self.family = inner.family
        self.m = inner.m

    def values(self, z: np.ndarray) -> np.ndarray:
        return self.inner.values(z[:-1]) - z[-1]

    def grads(self, z: np.ndarray):
        cols, vals = self.inner.grads(z[:-1])
        s_cols = np.full((self.m, 1), self.s_col, dtype=int)
        return (np.concatenate([cols, s_cols], axis=1),
                np.concatenate([vals, -np.ones((self.m, 1))], axis=1))

    def hess_compact(self, z: np.ndarray, lin_w: np.ndarray):
        return self.inner.hess_compact(z[:-1], lin_w)


class _PhaseOneProgram:
    """min s subject to g_j(x) <= s plus the original box on x."""

    def __init__(self, inner):
        self.inner = inner
        n = inner.n
        self.obj_const = 0.0
        self.obj_lin = np.zeros(n + 1)
        self.obj_lin[n] = 1.0
        self.bounds_lo = np.append(np.asarray(inner.bounds_lo, dtype=float), -np.inf)
        self.bounds_hi = np.append(np.asarray(inner.bounds_hi, dtype=float), np.inf)
        self.blocks = [_ShiftedBlock(b, n) for b in inner.blocks]
        self.m = inner.m

    @property
    def n(self) -> int:
        return self.inner.n + 1

    def objective_value(self, z: np.ndarray) -> float:
        return float(z[-1])

    def constraint_values(self, z: np.ndarray) -> np.ndarray:
        if not self.blocks:
            return np.empty(0)
        return np.concatenate([b.values(z) for b in self.blocks])


FEAS_MARGIN = 1e-8


def _box_midpoint(program) -> np.ndarray:
    lo = np.asarray(program.bounds_lo, dtype=float)
    hi = np.asarray(program.bounds_hi, dtype=float)
    mid = np.zeros(program.n if hasattr(program, "n") else lo.shape[0])
    both = np.isfinite(lo) & np.isfinite(hi)
    only_lo = np.isfinite(lo) & ~np.isfinite(hi)
    only_hi = ~np.isfinite(lo) & np.isfinite(hi)
    mid[both] = 0.5 * (lo[both] + hi[both])
    mid[only_lo] = lo[only_lo] + 1.0
    mid[only_hi] = hi[only_hi] - 1.0
    return mid


def phase_one(program, opts: SolveOptions | None = None) -> PhaseOneResult:
    """Find a strictly feasible point or certify infeasibility.

    Minimizes the worst violation s over g_j(x) <= s, stopping early as soon
    as every original inequality clears the relative margin
    g_j <= -1e-8 * (1 + |g_j|).
    """
    opts = opts or SolveOptions()
    if program.m == 0:
        x = _box_midpoint(program)
        return PhaseOneResult(x=x, feasible=True, max_violation=0.0,
                              outer_iters=0, newton_iters=0)
    x0 = _box_midpoint(program)
    vals0 = program.constraint_values(x0)
    if not np.all(np.isfinite(vals0)):
        raise SolverError(
            "constraints are not evaluable at the box midpoint; "
            "check thresholds and channel constants")
    aug = _PhaseOneProgram(program)
    worst = float(np.max(vals0))
    z = np.append(x0, worst + max(1.0, 0.1 * abs(worst)))
    barrier = _Barrier(aug)
    t = opts.t0
    newton_total = 0

    def margin_ok(xpart: np.ndarray) -> bool:
        v = program.constraint_values(xpart)
        return bool(np.all(np.isfinite(v))
                    and np.all(v <= -FEAS_MARGIN * (1.0 + np.abs(v))))

    for outer in range(1, opts.max_outer + 1):
        z, steps = _center(barrier, z, t, opts)
        newton_total += steps
        xpart = z[:-1]
        if margin_ok(xpart):
            return PhaseOneResult(x=xpart, feasible=True,
                                  max_violation=float(np.max(program.constraint_values(xpart))),
                                  outer_iters=outer, newton_iters=newton_total)
        if barrier.m_total / t <= opts.duality_gap_tol:
            break
        t *= opts.barrier_mu
    xpart = z[:-1]
    worst = float(np.max(program.constraint_values(xpart)))
    feasible = margin_ok(xpart)
    return PhaseOneResult(x=xpart, feasible=feasible, max_violation=worst,
                          outer_iters=outer, newton_iters=newton_total)


# ---------------------------------------------------------------------------
# Diagnostics and sampling
# ---------------------------------------------------------------------------

def check_gradients(program, x: np.ndarray) -> float:
    """Max relative error between analytic and central-difference gradients.

    Covers the objective and every constraint row; steps are scaled per
    coordinate as 1e-6 * (1 + |x_i|).  Entries are normalized by
    max(1, |analytic|).
    """
    n = x.shape[0]
    steps = 1e-6 * (1.0 + np.abs(x))
    jac = program.constraint_jacobian(x)
    fd_jac = np.zeros_like(jac)
    fd_obj = np.zeros(n)
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += steps[i]
        xm[i] -= steps[i]
        vp = program.constraint_values(xp)
        vm = program.constraint_values(xm)
        fd_jac[:, i] = (vp - vm) / (2.0 * steps[i])
        fd_obj[i] = (program.objective_value(xp) - program.objective_value(xm)) / (2.0 * steps[i])
    err_c = np.abs(fd_jac - jac) / np.maximum(1.0, np.abs(jac))
    err_o = np.abs(fd_obj - program.obj_lin) / np.maximum(1.0, np.abs(program.obj_lin))
    worst = float(err_o.max()) if n else 0.0
    if jac.size:
        worst = max(worst, float(err_c.max()))
    return worst


def _chord(program, x: np.ndarray, d: np.ndarray,
           feasible_fn) -> tuple[float, float]:
    lo = np.asarray(program.bounds_lo, dtype=float)
    hi = np.asarray(program.bounds_hi, dtype=float)
    t_hi, t_lo = np.inf, -np.inf
    pos = d > 1e-14
    neg = d < -1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        ups = np.concatenate([((hi - x)[pos] / d[pos]) if np.any(pos) else [],
                              ((lo - x)[neg] / d[neg]) if np.any(neg) else []])
        dns = np.concatenate([((lo - x)[pos] / d[pos]) if np.any(pos) else [],
                              ((hi - x)[neg] / d[neg]) if np.any(neg) else []])
    if ups.size:
        t_hi = float(np.min(ups))
    if dns.size:
        t_lo = float(np.max(dns))
    t_hi = min(t_hi, 1e6) * (1.0 - 1e-9)
    t_lo = max(t_lo, -1e6) * (1.0 - 1e-9)

    def search(limit: float) -> float:
        if feasible_fn(x + limit * d):
            return limit
        good, bad = 0.0, limit
        for _ in range(30):
            mid = 0.5 * (good + bad)
            if feasible_fn(x + mid * d):
                good = mid
            else:
                bad = mid
        return good * 0.999

    return search(t_lo), search(t_hi)


def sample_strictly_feasible(program, x0: np.ndarray, rng: np.random.Generator,
                             n_samples: int, burn: int = 50,
                             thin: int = 3) -> np.ndarray:
    """Hit-and-run sampler over the strictly feasible set, started at x0.

    Each step draws a random direction, finds the feasible chord (an interval,
    by convexity) and jumps to a uniform point on it; after burn-in the chain
    is approximately uniform over the feasible region.
    """
    if not strictly_feasible(program, x0):
        raise SolverError("sampler requires a strictly feasible starting point")

    def feas(z: np.ndarray) -> bool:
        return strictly_feasible(program, z)

    n = x0.shape[0]
    x = np.array(x0, dtype=float)
    out = np.empty((n_samples, n))
    collected = 0
    step = 0
    total = burn + n_samples * thin
    while collected < n_samples and step < 20 * total:
        step += 1
        d = rng.standard_normal(n)
        d /= np.linalg.norm(d)
        t_lo, t_hi = _chord(program, x, d, feas)
        if t_hi - t_lo <= 0:
            continue
        t = rng.uniform(t_lo, t_hi)
        cand = x + t * d
        if not feas(cand):
            # numerical edge of the chord; pull halfway toward the center
            cand = x + 0.5 * t * d
            if not feas(cand):
                continue
        x = cand
        if step > burn and (step - burn) % thin == 0:
            out[collected] = x
            collected += 1
    if collected < n_samples:
        raise SolverError("hit-and-run sampler stalled before collecting samples")
    return out
