"""Local and multistart minimization of line energies.

The search space is the product of ``M`` spheres (each line is a unit
representative; the energy is sign invariant).  The local solver is a
Riemannian nonlinear conjugate gradient method:

* Polak-Ribiere+ direction updates, restarted every ``restart_period``
  iterations or whenever the direction fails to be a descent direction;
* strong Wolfe line search (sufficient decrease ``armijo_c``, curvature
  0.1); once energy differences drown in rounding error the step is chosen
  from the derivative alone and may raise the energy by at most a few ulps;
* retraction by normalizing every row, vector transport by tangent
  projection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .energy import CoincidentLines, Kernel, euclidean_gradient, project_tangent
from .geometry import COINCIDENT_TOL, LineSet, min_pairwise_distance_sq, pairwise_distance_sq, random_lineset

log = logging.getLogger(__name__)

#: random starts with a pair closer than this are redrawn
DEGENERATE_START = 1e-8


@dataclass(frozen=True)
class OptimOptions:
    max_iters: int = 100_000
    grad_tol: float = 1e-10
    restart_period: int | None = None  # None: 10 * d * M
    initial_step: float = 1.0
    backtrack: float = 0.5
    armijo_c: float = 1e-4
    max_angle: float = 0.5  # cap on the per-line rotation of a trial step (radians)
    rng_seed: int = 0

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass
class LocalMinimum:
    lines: LineSet
    energy: float
    gradient_norm: float
    iterations: int
    converged: bool
    history: list | None = None


Objective = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


def kernel_objective(k: Kernel) -> Objective:
    def fun(U):
        E, g = euclidean_gradient(U, k)
        return E, project_tangent(U, g)
    return fun


def _retract(U, D, alpha):
    V = U + alpha * D
    return V / np.linalg.norm(V, axis=1, keepdims=True)


class _Ray:
    """The objective restricted to the retraction curve ``alpha -> normalize(U + alpha D)``."""

    def __init__(self, fun, U, D):
        self.fun, self.U, self.D = fun, U, D
        self.cache = {}

    def eval(self, alpha):
        alpha = float(alpha)
        if alpha not in self.cache:
            V = self.U + alpha * self.D
            nv = np.linalg.norm(V, axis=1, keepdims=True)
            X = V / nv
            try:
                E, g = self.fun(X)
            except CoincidentLines:
                E, g = np.inf, None
            if not np.isfinite(E):
                E, g, slope = np.inf, None, 0.0
            else:
                # d/dalpha normalize(u + alpha d) = P_X d / |v|, and g is tangent at X
                slope = float(np.sum(g * self.D / nv))
            self.cache[alpha] = (X, E, g, slope)
        return self.cache[alpha]

    def phi(self, a):
        return self.eval(np.ravel(a)[0])[1]

    def dphi(self, a):
        return np.array([self.eval(np.ravel(a)[0])[3]])


def _line_search(ray, E0, slope0, alpha0, opts):
    """Strong Wolfe step along ``ray``; falls back to a derivative secant step
    when energy differences are below working precision.  Returns the cache
    entry of the accepted point or None."""
    import warnings

    from scipy.optimize import line_search

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = line_search(ray.phi, ray.dphi, np.zeros(1), np.ones(1),
                          gfk=np.array([slope0]), old_fval=E0,
                          c1=opts.armijo_c, c2=0.1, amax=alpha0 * 64, maxiter=30)
    alpha = res[0]
    if alpha is not None and alpha > 0:
        X, E, g, _ = ray.eval(alpha)
        if g is not None and E <= E0:
            return alpha, ray.eval(alpha)
    # energy differences are below working precision: step to the zero of
    # the secant model of phi' and accept if phi' shrank and phi did not rise
    noise = 64 * np.finfo(float).eps * max(abs(E0), 1.0)
    a = alpha0
    for _ in range(60):
        X, E, g, sl = ray.eval(a)
        if g is not None:
            break
        a *= opts.backtrack
    else:
        return None
    if not sl > slope0:
        return None
    a_star = a * slope0 / (slope0 - sl)
    X, E, g, sl = ray.eval(a_star)
    if g is not None and E <= E0 + noise and abs(sl) < abs(slope0):
        return a_star, ray.eval(a_star)
    return None


def conjugate_gradient(fun: Objective, U0: np.ndarray, opts: OptimOptions,
                       record: bool = False) -> tuple[np.ndarray, float, np.ndarray, int, bool, list]:
    """Minimize ``fun`` over products of unit spheres starting at ``U0``.

    ``fun(U)`` returns ``(value, tangent_gradient)``.  Returns
    ``(U, value, gradient, iterations, converged, history)``.
    """
    U = np.array(U0, dtype=float)
    M, d = U.shape
    period = opts.restart_period or 10 * d * M
    E, g = fun(U)
    history = [E] if record else []
    gnorm = np.linalg.norm(g)
    D = -g
    alpha_prev = opts.initial_step
    since_restart = 0
    it = 0
    while gnorm > opts.grad_tol and it < opts.max_iters:
        slope = float(np.sum(g * D))
        if slope >= 0:
            D, slope, since_restart = -g, -gnorm ** 2, 0
        dmax = np.linalg.norm(D, axis=1).max()
        alpha0 = min(2.0 * alpha_prev if it else opts.initial_step, opts.max_angle / dmax)
        found = _line_search(_Ray(fun, U, D), E, slope, alpha0, opts)
        if found is None:
            if since_restart == 0:
                break  # steepest descent makes no progress at working precision
            D, since_restart = -g, 0
            continue
        alpha, (Un, En, gn, _) = found
        it += 1
        since_restart += 1
        # transport previous direction and gradient to the new point
        Dt = project_tangent(Un, D)
        gt = project_tangent(Un, g)
        beta = max(0.0, float(np.sum(gn * (gn - gt))) / max(gnorm ** 2, 1e-300))
        U, E, g = Un, En, gn
        gnorm = np.linalg.norm(g)
        if record:
            history.append(E)
        alpha_prev = alpha
        if since_restart >= period:
            D, since_restart = -g, 0
        else:
            D = -g + beta * Dt
    return U, E, g, it, bool(gnorm <= opts.grad_tol), history


def minimize_energy(init: LineSet, k: Kernel, opts: OptimOptions = OptimOptions(),
                    record: bool = False) -> LocalMinimum:
    """Local minimum of the ``k``-energy starting from ``init``.

    If the iterates run into a line collision the configuration is perturbed
    once and the solve restarted; a second collision raises.
    """
    U0 = init.vectors
    fun = kernel_objective(k)
    for attempt in range(2):
        try:
            U, E, g, it, conv, hist = conjugate_gradient(fun, U0, opts, record)
            return LocalMinimum(LineSet(U), E, float(np.linalg.norm(g)), it, conv,
                                hist if record else None)
        except (CoincidentLines, ValueError) as exc:
            if attempt:
                raise CoincidentLines(f"line collision during optimization persisted after perturbation: {exc}")
            rng = np.random.default_rng(opts.rng_seed + 7919)
            U0 = U0 + 1e-3 * rng.standard_normal(U0.shape)
            U0 /= np.linalg.norm(U0, axis=1, keepdims=True)
            log.warning("collision during optimization; perturbing and retrying")


def start_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Independent seed for start ``index`` of a multistart run."""
    return np.random.SeedSequence([seed, index])


def random_start(d: int, M: int, seed: int, index: int) -> LineSet:
    rng = np.random.default_rng(start_seed(seed, index))
    return random_lineset(rng, d, M, min_distance_sq=DEGENERATE_START)


def _best(results: Sequence[LocalMinimum | None]) -> LocalMinimum:
    best = None
    for r in results:  # first index wins ties
        if r is not None and (best is None or r.energy < best.energy):
            best = r
    if best is None:
        raise RuntimeError("every start failed")
    return best


def multistart_minimize(d: int, M: int, k: Kernel, n_starts: int = 20,
                        opts: OptimOptions = OptimOptions(), workers: int = 1) -> LocalMinimum:
    """Best local minimum over ``n_starts`` uniformly random starts.

    Start ``i`` is drawn from ``SeedSequence([opts.rng_seed, i])``, so the
    result does not depend on ``workers``.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")

    def run(i):
        try:
            return minimize_energy(random_start(d, M, opts.rng_seed, i), k, opts)
        except (CoincidentLines, RuntimeError) as exc:
            log.warning("start %d failed: %s", i, exc)
            return None

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, range(n_starts)))
    else:
        results = [run(i) for i in range(n_starts)]
    return _best(results)


def soft_packing_objective(s: float) -> Objective:
    """``(2/s) log sum_{i != j} t_ij^(-s/2)``, evaluated stably.

    Same minimizers as the Riesz-``s`` energy, but of order one for any
    ``s``; as ``s`` grows it tends to ``-log(min t)``.
    """
    def fun(U):
        G = U @ U.T
        t = pairwise_distance_sq(U)
        M = len(U)
        off = ~np.eye(M, dtype=bool)
        if np.any(t[off] <= COINCIDENT_TOL):
            raise CoincidentLines("coincident lines")
        logt = np.zeros_like(t)
        logt[off] = np.log(t[off])
        a = np.where(off, -0.5 * s * logt, -np.inf)
        amax = a.max()
        w = np.exp(a - amax)
        total = w.sum()
        value = (2.0 / s) * (amax + np.log(total))
        # d value / d t_ij = -(w_ij / total) / t_ij
        fp = np.zeros_like(t)
        fp[off] = -(w[off] / total) / t[off]
        grad = -4.0 * (fp * G) @ U
        return value, project_tangent(U, grad)
    return fun


def packing_optimize(d: int, M: int, opts: OptimOptions = OptimOptions(),
                     s_schedule: Sequence[float] = tuple(2.0 ** k for k in range(1, 11)),
                     n_starts: int = 30, init: LineSet | None = None) -> LocalMinimum:
    """Approximate best packing by Riesz-``s`` continuation.

    The first exponent is solved from ``n_starts`` random starts (or from
    ``init``); each later exponent is warm-started from the previous
    solution.  Each stage minimizes `soft_packing_objective`, and the
    reported ``energy`` is the last stage's value (about ``-log`` of the
    minimal squared distance).
    """
    s_schedule = list(s_schedule)
    if any(b <= a for a, b in zip(s_schedule, s_schedule[1:])):
        raise ValueError("s_schedule must be increasing")
    stage_opts = replace(opts, grad_tol=max(opts.grad_tol, 1e-9), max_iters=min(opts.max_iters, 20_000))
    fun = soft_packing_objective(s_schedule[0])
    if init is None:
        best = None
        for i in range(n_starts):
            U0 = random_start(d, M, opts.rng_seed, i).vectors
            res = conjugate_gradient(fun, U0, stage_opts)
            if best is None or res[1] < best[1]:
                best = res
        U = best[0]
    else:
        U = init.vectors
    total_it = 0
    for s in s_schedule:
        U, E, g, it, conv, _ = conjugate_gradient(soft_packing_objective(s), U, stage_opts)
        total_it += it
    return LocalMinimum(LineSet(U), E, float(np.linalg.norm(g)), total_it, conv)


def directional_derivatives(L: LineSet, k: Kernel, step: float = 1e-5, n_dirs: int = 5,
                            rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Analytic and central-difference derivatives along random unit tangent directions.

    The finite difference follows the retraction curve ``normalize(U + h D)``.
    """
    rng = rng or np.random.default_rng(0)
    fun = kernel_objective(k)
    U = L.vectors
    _, g = fun(U)
    exact, fd = [], []
    for _ in range(n_dirs):
        D = project_tangent(U, rng.standard_normal(U.shape))
        D /= np.linalg.norm(D)
        exact.append(float(np.sum(g * D)))
        fd.append((fun(_retract(U, D, step))[0] - fun(_retract(U, D, -step))[0]) / (2 * step))
    return np.array(exact), np.array(fd)


def gradient_check(L: LineSet, k: Kernel, step: float = 1e-5, n_dirs: int = 5,
                   rng: np.random.Generator | None = None) -> float:
    """Largest relative error between `energy_gradient` and central differences.

    Meaningless at stationary points, where both derivatives vanish; use
    `directional_derivatives` there.
    """
    if not 1e-8 < step < 1e-3:
        raise ValueError("step must lie in (1e-8, 1e-3)")
    exact, fd = directional_derivatives(L, k, step, n_dirs, rng)
    denom = np.maximum(np.maximum(np.abs(exact), np.abs(fd)), 1e-300)
    return float(np.max(np.abs(fd - exact) / denom))
