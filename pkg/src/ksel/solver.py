"""Certified solver for the non-negative L1-regularized quadratic program.

Solves

    min_{alpha >= 0}  0.5 alpha' H alpha - c' alpha + lambda * sum(alpha)

to global optimality (the problem is convex for PSD H) and certifies the
result through an independently recomputable KKT residual.  Two backends
are provided: cyclic coordinate descent with exact per-coordinate
minimization, and an accelerated projected-gradient method with adaptive
restart.  Path utilities (warm-started lambda grids, support-size
search) sit on top of the single-solve entry point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dependence import QuadraticProblem
from .errors import NumericsError

COORDINATE_DESCENT = "coordinate-descent"
ACCELERATED_PROXIMAL = "accelerated-proximal"
BACKENDS = (COORDINATE_DESCENT, ACCELERATED_PROXIMAL)

# diagonal entries at or below this fraction of the largest one are
# treated as zero rows: their coordinates are pinned to 0
_PIN_RTOL = 1e-12

# refresh the maintained gradient state every this many sweeps to stop
# incremental-update drift from accumulating
_REFRESH_EVERY = 64

# coefficients at or below this fraction of the largest one are snapped
# to exact zero before certification: on tie faces (duplicate features)
# gradient roundoff can park machine-epsilon mass on a redundant
# coordinate, and the certificate is recomputed after snapping
_SNAP_RTOL = 1e-12


@dataclass
class SolverConfig:
    """Iteration budget, certificate tolerance, and backend choice.

    ``max_iters`` counts coordinate-descent sweeps or proximal-gradient
    iterations.  ``random_sweep`` shuffles the coordinate order each
    sweep using a fixed-seed generator, so runs stay reproducible.
    """

    max_iters: int = 100_000
    tol: float = 1e-8
    backend: str = COORDINATE_DESCENT
    random_sweep: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass(frozen=True)
class Solution:
    """A feasible iterate with its optimality certificate.

    ``alpha`` is exactly non-negative (projection, not rounding);
    ``converged`` implies ``kkt_residual <= tol`` at return time.
    """

    alpha: np.ndarray
    lam: float
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=np.float64)
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def support(self) -> np.ndarray:
        """Indices of strictly positive coefficients."""
        return np.flatnonzero(self.alpha > 0)

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.alpha > 0))


@dataclass(frozen=True)
class LambdaSearch:
    """Outcome of the support-size search: flagged when off-window."""

    lam: float
    solution: Solution
    support_size: int
    in_window: bool


def objective_value(problem: QuadraticProblem, lam: float, alpha: np.ndarray) -> float:
    """0.5 a'Ha - c'a + lam*sum(a) + const for non-negative alpha."""
    a = np.asarray(alpha, dtype=np.float64)
    return float(
        0.5 * a @ (problem.H @ a) - problem.c @ a + lam * a.sum() + problem.const_term
    )


def lambda_max(problem: QuadraticProblem) -> float:
    """Smallest penalty for which the all-zero vector is optimal.

    At alpha = 0 the gradient of the penalized objective is
    ``-c + lam``; it is non-negative on the feasible cone exactly when
    ``lam >= max_k c_k``, so the threshold is ``max(0, max_k c_k)``.
    """
    return max(0.0, float(problem.c.max()))


def kkt_residual(problem: QuadraticProblem, lam: float, alpha) -> float:
    """Scaled first-order optimality residual; zero iff alpha is optimal.

    With ``g = H alpha - c + lam``, active coordinates contribute |g_k|
    and zero coordinates contribute the infeasible part max(0, -g_k); the
    max is scaled by ``max(1, ||c||_inf)``.
    """
    a = np.asarray(alpha, dtype=np.float64)
    if a.shape != problem.c.shape:
        raise ValueError("alpha has wrong length")
    if (a < 0).any():
        raise ValueError("alpha must be non-negative")
    g = problem.H @ a - problem.c + lam
    return _kkt_from_gradient(g, a, _kkt_scale(problem))


def _kkt_scale(problem: QuadraticProblem) -> float:
    return max(1.0, float(np.abs(problem.c).max()))


def _kkt_from_gradient(g: np.ndarray, alpha: np.ndarray, scale: float) -> float:
    res = np.where(alpha > 0, np.abs(g), np.maximum(0.0, -g))
    return float(res.max() / scale)


def _snap_tiny(alpha: np.ndarray) -> np.ndarray:
    peak = float(alpha.max()) if alpha.size else 0.0
    if peak > 0:
        alpha[alpha <= _SNAP_RTOL * peak] = 0.0
    return alpha


def _certify(problem, lam, alpha, cfg, iterations) -> Solution:
    """Snap tie-face roundoff to zero and recompute the certificate fresh."""
    alpha = _snap_tiny(alpha)
    g = problem.H @ alpha - problem.c + lam
    kkt = _kkt_from_gradient(g, alpha, _kkt_scale(problem))
    return Solution(
        alpha=alpha,
        lam=lam,
        objective=objective_value(problem, lam, alpha),
        kkt_residual=kkt,
        iterations=iterations,
        converged=kkt <= cfg.tol,
    )


def _prepare_start(problem: QuadraticProblem, warm_start) -> np.ndarray:
    if warm_start is None:
        return np.zeros(problem.d)
    a = np.array(warm_start, dtype=np.float64)
    if a.shape != (problem.d,):
        raise ValueError("warm start has wrong length")
    if (a < 0).any():
        raise ValueError("warm start must be non-negative")
    return a


def solve_nn_lasso(
    problem: QuadraticProblem,
    lam: float,
    cfg: SolverConfig | None = None,
    warm_start=None,
) -> Solution:
    """Solve the non-negative lasso program at one penalty value.

    Returns the best iterate with ``converged=False`` when the budget
    runs out; raises :class:`NumericsError` if iterates go non-finite
    (corrupt problem data).
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    cfg = cfg or SolverConfig()
    h = problem.H
    scale = float(np.abs(h).max()) if h.size else 0.0
    if scale > 0 and float(np.abs(h - h.T).max()) > 1e-8 * scale:
        raise ValueError("H must be symmetric")
    if not np.isfinite(h).all() or not np.isfinite(problem.c).all():
        raise NumericsError("problem data contains NaN or Inf")
    alpha0 = _prepare_start(problem, warm_start)
    if cfg.backend == COORDINATE_DESCENT:
        return _solve_cd(problem, lam, cfg, alpha0)
    return _solve_apg(problem, lam, cfg, alpha0)


def _solve_cd(problem, lam, cfg, alpha):
    h = problem.H
    c = problem.c
    d = problem.d
    hdiag = h.diagonal().copy()
    hmax = float(hdiag.max()) if d else 0.0
    pinned = hdiag <= _PIN_RTOL * hmax if hmax > 0 else np.ones(d, dtype=bool)
    alpha[pinned] = 0.0
    active = np.flatnonzero(~pinned)
    scale = _kkt_scale(problem)
    rng = (
        np.random.Generator(np.random.Philox(np.random.SeedSequence(0)))
        if cfg.random_sweep
        else None
    )

    r = h @ alpha if alpha.any() else np.zeros(d)
    sweeps = 0
    while sweeps < cfg.max_iters:
        sweeps += 1
        order = rng.permutation(active) if rng is not None else active
        max_change = 0.0
        for k in order:
            old = alpha[k]
            numer = c[k] - lam - (r[k] - hdiag[k] * old)
            new = numer / hdiag[k]
            if new < 0.0:
                new = 0.0
            if new != old:
                r += h[k] * (new - old)
                alpha[k] = new
                change = abs(new - old)
                if change > max_change:
                    max_change = change
        if not np.isfinite(max_change) or not np.isfinite(alpha).all():
            raise NumericsError("coordinate descent produced non-finite iterates")
        amax = float(alpha.max()) if d else 0.0
        if max_change <= cfg.tol * (1.0 + amax):
            r = h @ alpha  # fresh gradient state before certifying
            if _kkt_from_gradient(r - c + lam, alpha, scale) <= cfg.tol:
                break
        elif sweeps % _REFRESH_EVERY == 0:
            r = h @ alpha
    return _certify(problem, lam, alpha, cfg, sweeps)


def _lipschitz_estimate(h: np.ndarray) -> float:
    """Largest-magnitude eigenvalue of H via power iteration."""
    d = h.shape[0]
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(1)))
    b = gen.standard_normal(d)
    norm = np.linalg.norm(b)
    if norm == 0:
        return 0.0
    b /= norm
    lam = 0.0
    for _ in range(100):
        hb = h @ b
        norm = np.linalg.norm(hb)
        if norm == 0:
            return 0.0
        lam = norm
        b = hb / norm
    return float(lam)


def _solve_apg(problem, lam, cfg, alpha):
    h = problem.H
    c = problem.c
    scale = _kkt_scale(problem)
    lip = _lipschitz_estimate(h) * 1.05
    if lip <= 0:
        # H is (numerically) zero: the objective is linear on the cone,
        # so 0 is the only sensible iterate; certify it honestly.
        zero = np.zeros(problem.d)
        kkt = _kkt_from_gradient(-c + lam, zero, scale)
        return Solution(
            alpha=zero,
            lam=lam,
            objective=objective_value(problem, lam, zero),
            kkt_residual=kkt,
            iterations=0,
            converged=kkt <= cfg.tol,
        )
    eta = 1.0 / lip

    x = alpha
    z = x.copy()
    t = 1.0
    f_x = objective_value(problem, lam, x)
    best_x = x.copy()
    best_f = f_x
    finished = False
    iters = 0
    while iters < cfg.max_iters:
        iters += 1
        g_z = h @ z - c + lam
        x_new = np.maximum(0.0, z - eta * g_z)
        if not np.isfinite(x_new).all():
            raise NumericsError("proximal gradient produced non-finite iterates")
        f_new = objective_value(problem, lam, x_new)
        if f_new < best_f:
            best_f = f_new
            best_x = x_new.copy()
        if _kkt_from_gradient(h @ x_new - c + lam, x_new, scale) <= cfg.tol:
            x = x_new
            finished = True
            break
        if f_new > f_x:  # restart momentum on objective increase
            t = 1.0
            z = x_new.copy()
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            z = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        x = x_new
        f_x = f_new
    if not finished:
        x = best_x
    return _certify(problem, lam, x, cfg, iters)


def reg_path(
    problem: QuadraticProblem,
    lambda_grid,
    cfg: SolverConfig | None = None,
) -> list[Solution]:
    """Solve along a strictly descending penalty grid with warm starts."""
    grid = [float(v) for v in lambda_grid]
    if not grid:
        raise ValueError("lambda grid is empty")
    if any(v <= 0 for v in grid):
        raise ValueError("lambda grid must be positive")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be strictly descending")
    solutions: list[Solution] = []
    warm = None
    for lam in grid:
        sol = solve_nn_lasso(problem, lam, cfg, warm_start=warm)
        solutions.append(sol)
        warm = sol.alpha
    return solutions


def search_lambda_for_k(
    problem: QuadraticProblem,
    k_target: int,
    window: int = 10,
    cfg: SolverConfig | None = None,
    budget: int = 50,
) -> LambdaSearch:
    """Find a penalty whose support size lands in [k_target, k_target+window].

    Geometric bisection over (0, lambda_max], warm-starting every probe
    from the nearest previously solved penalty.  Returns the first
    in-window probe; when the budget is exhausted (or the window is
    unreachable) the result is flagged and carries the probe whose
    support is closest above ``k_target``, falling back to the largest
    support seen.
    """
    if not 1 <= k_target <= problem.d:
        raise ValueError("k_target must lie in [1, d]")
    if window < 0:
        raise ValueError("window must be non-negative")
    cfg = cfg or SolverConfig()
    lmax = lambda_max(problem)
    lo_window, hi_window = k_target, k_target + window

    if lmax <= 0:
        # no feature ever becomes active; report the zero solution honestly
        sol = solve_nn_lasso(problem, 1.0, cfg)
        return LambdaSearch(1.0, sol, sol.support_size, False)

    visited: list[tuple[float, Solution]] = []

    def probe(lam: float) -> Solution:
        warm = None
        if visited:
            nearest = min(visited, key=lambda lv: abs(math.log(lv[0]) - math.log(lam)))
            warm = nearest[1].alpha
        sol = solve_nn_lasso(problem, lam, cfg, warm_start=warm)
        visited.append((lam, sol))
        return sol

    def result(lam: float, sol: Solution) -> LambdaSearch:
        size = sol.support_size
        return LambdaSearch(lam, sol, size, lo_window <= size <= hi_window)

    # downward expansion until the support reaches the target
    hi = lmax
    lam = lmax
    sol = probe(lam)
    if lo_window <= sol.support_size <= hi_window:
        return result(lam, sol)
    lo = None
    floor = lmax * 2.0**-60
    while len(visited) < budget:
        lam *= 0.5
        if lam < floor:
            break
        sol = probe(lam)
        size = sol.support_size
        if lo_window <= size <= hi_window:
            return result(lam, sol)
        if size >= k_target:
            lo = lam
            break
        hi = lam

    # geometric bisection between overshoot (lo) and undershoot (hi)
    if lo is not None:
        while len(visited) < budget:
            mid = math.sqrt(lo * hi)
            sol = probe(mid)
            size = sol.support_size
            if lo_window <= size <= hi_window:
                return result(mid, sol)
            if size < k_target:
                hi = mid
            else:
                lo = mid

    above = [(lam, s) for lam, s in visited if s.support_size >= k_target]
    if above:
        lam, sol = min(above, key=lambda lv: (lv[1].support_size, -lv[0]))
    else:
        lam, sol = max(visited, key=lambda lv: (lv[1].support_size, lv[0]))
    return LambdaSearch(lam, sol, sol.support_size, False)
