"""Monte Carlo evaluation of the statistical potential and the union bound.

For a set ``L`` of lines, ``f_{d,r,alpha}(L)`` is the ``K > 0`` solving

    E_V F_{d,r}( K^2 / (d * max_j <u_j, V>^2) ) = 1 - alpha,

``V`` uniform on the sphere.  It is estimated by replacing the expectation
with an average over ``I`` samples ``c_i = max_j <u_j, V_i>^2``.

Random streams
--------------
Samples are produced in fixed blocks of ``BLOCK`` vectors; block ``b`` of
stream ``key`` under seed ``seed`` comes from
``SeedSequence(seed, spawn_key=key + (b,))``.  The sample multiset is
therefore independent of how blocks are distributed over worker threads.
Thread count: ``workers`` argument, else the ``PROJLINES_THREADS``
environment variable, else 1.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..geometry import LineSet
from .fdist import f_cdf, f_logpdf, f_quantile

BLOCK = 1 << 16
N_BATCHES = 10

STREAM_EVAL = 0
STREAM_SCREEN = 1
STREAM_GENERATE = 2

METHODS = ("evenly_spaced", "naive_mc", "local", "very_local", "upper_bound")


@dataclass(frozen=True)
class StatParams:
    d: int
    r: int
    alpha: float
    N: int | None = None

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.N is None:
            object.__setattr__(self, "N", 2 ** self.d - 1)
        if self.N < 1:
            raise ValueError("N must be >= 1")


@dataclass(frozen=True)
class MCParams:
    """Monte Carlo sizes.  Defaults are one tenth of the published run."""

    I: int = 2_000_000
    N1: int = 20_000
    N2: int = 2_000
    I1: int = 10_000
    I2: int = 100_000
    I3: int = 2_000_000
    sigma: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("I", "N1", "N2", "I1", "I2", "I3"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.N2 > self.N1:
            raise ValueError("N2 must not exceed N1")

    @classmethod
    def full(cls, **kw):
        """The full-size run: I = I3 = 2e7, N1 = 2e5, N2 = 2e4, I1 = 1e4, I2 = 2e5."""
        sizes = dict(I=20_000_000, N1=200_000, N2=20_000, I1=10_000, I2=200_000, I3=20_000_000)
        sizes.update(kw)
        return cls(**sizes)


@dataclass
class KResult:
    K: float
    method: str
    samples_used: int
    rng_seed: int | None
    stderr_estimate: float
    lines: LineSet | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("K must be positive")
        if self.stderr_estimate < 0:
            raise ValueError("stderr must be non-negative")


def as_seed(rng) -> int:
    """Integer seed from an int or a numpy Generator; ``None`` is refused."""
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2 ** 63))
    if rng is None:
        raise ValueError("an explicit seed is required")
    return int(rng)


def thread_count(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get("PROJLINES_THREADS", "1") or 1)
    return max(1, workers)


def block_rng(seed: int, key: tuple, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key) + (block,)))


def max_sq_projections(L, I: int, seed: int, key: tuple = (STREAM_EVAL,),
                       workers: int | None = None) -> np.ndarray:
    """``c_i = max_j <u_j, V_i>^2`` for ``I`` uniform ``V_i`` from the given stream."""
    U = L.vectors if isinstance(L, LineSet) else np.asarray(L, dtype=float)
    d = U.shape[1]
    nblocks = -(-I // BLOCK)

    def one(b):
        n = min(BLOCK, I - b * BLOCK)
        V = block_rng(seed, key, b).standard_normal((n, d))
        # (N, n) layout: the max then runs across rows, which numpy vectorizes
        P = U @ V.T
        np.multiply(P, P, out=P)
        return P.max(axis=0) / np.einsum("ij,ij->i", V, V)

    workers = thread_count(workers)
    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(one, range(nblocks)))
    else:
        parts = [one(b) for b in range(nblocks)]
    return np.concatenate(parts)


def k_bracket(c, params: StatParams) -> tuple[float, float]:
    """Interval ``[lo, hi]`` containing the root of the K equation.

    With ``q`` the ``1 - alpha`` quantile of ``F_{d,r}``: at ``K^2 = d q min(c)``
    every term is ``<= 1 - alpha`` and at ``K^2 = d q max(c)`` every term is
    ``>= 1 - alpha``.
    """
    c = np.asarray(c, dtype=float)
    q = f_quantile(params.d, params.r, 1 - params.alpha)
    return math.sqrt(params.d * q * c.min()), math.sqrt(params.d * q * c.max())


def solve_k_equation(c, params: StatParams, weights=None, guess: float | None = None,
                     rtol: float = 1e-13) -> float:
    """Root ``K`` of ``mean_i F_{d,r}(K^2 / (d c_i)) = 1 - alpha``.

    ``weights`` turns the mean into a weighted mean (used for histogrammed
    samples).  Safeguarded Newton on ``y = K^2`` inside the bracket of
    `k_bracket`; bisection whenever Newton leaves the bracket.  ``guess``
    only changes the starting point; large unweighted samples are started
    from a histogram solve.
    """
    c = np.asarray(c, dtype=float).ravel()
    if c.size == 0:
        raise ValueError("empty sample list")
    if np.any(c <= 0) or np.any(c > 1 + 1e-12):
        raise ValueError("c values must lie in (0, 1]")
    if weights is None:
        w = np.full(c.size, 1.0 / c.size)
    else:
        w = np.asarray(weights, dtype=float).ravel()
        w = w / w.sum()
    d, r, target = params.d, params.r, 1.0 - params.alpha
    lo, hi = (k * k for k in k_bracket(c, params))
    if lo == hi:
        return math.sqrt(lo)
    dc = d * c

    def g(y):
        x = y / dc
        val = float(w @ f_cdf(d, r, x)) - target
        der = float(w @ (np.exp(f_logpdf(d, r, x)) / dc))
        return val, der

    glo, _ = g(lo)
    ghi, _ = g(hi)
    if glo > 1e-14 or ghi < -1e-14:
        raise ArithmeticError(f"bracket does not contain the root: g(lo)={glo:.3e}, g(hi)={ghi:.3e}")
    if guess is None and weights is None and c.size > 50_000:
        guess = binned_k(c, params, 4096)
    y = guess * guess if guess is not None and lo < guess * guess < hi else 0.5 * (lo + hi)
    for _ in range(200):
        val, der = g(y)
        if val == 0:
            break
        if val < 0:
            lo = y
        else:
            hi = y
        step = val / der if der > 0 else np.inf
        y_new = y - step
        if not lo < y_new < hi:
            y_new = 0.5 * (lo + hi)
        if abs(y_new - y) <= rtol * y or hi - lo <= rtol * hi:
            y = y_new
            break
        y = y_new
    return math.sqrt(y)


def binned_k(c, params: StatParams, nbins: int, guess: float | None = None) -> float:
    """`solve_k_equation` on a histogram of ``c`` with ``nbins`` equal bins on [0, 1].

    Each bin is represented by the mean of its members, which makes the
    approximation exact to first order; the error in the averaged CDF is at
    most ``sup|g''| / (8 nbins^2)`` for ``g(c) = F(K^2/(d c))``.  Used to rank
    candidates, never for a reported value.
    """
    c = np.asarray(c, dtype=float)
    idx = np.minimum((c * nbins).astype(np.int64), nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    sums = np.bincount(idx, weights=c, minlength=nbins)
    keep = counts > 0
    return solve_k_equation(sums[keep] / counts[keep], params, weights=counts[keep], guess=guess)


def evaluate_statistical_potential(L: LineSet, params: StatParams, I: int, rng,
                                   batches: int = N_BATCHES, workers: int | None = None,
                                   method: str = "evenly_spaced") -> KResult:
    """Monte Carlo estimate of ``f_{d,r,alpha}(L)`` from ``I`` uniform samples.

    The standard error is the spread of the roots computed separately on
    ``batches`` contiguous slices of the sample, divided by ``sqrt(batches)``.
    """
    if len(L) < 1 or I < 1:
        raise ValueError("need at least one line and one sample")
    if L.d != params.d:
        raise ValueError(f"line set lives in R^{L.d}, parameters say d={params.d}")
    seed = as_seed(rng)
    c = max_sq_projections(L, I, seed, (STREAM_EVAL,), workers)
    K = solve_k_equation(c, params)
    stderr = 0.0
    if batches > 1 and I >= 2 * batches:
        ks = [solve_k_equation(part, params) for part in np.array_split(c, batches)]
        stderr = float(np.std(ks, ddof=1) / math.sqrt(batches))
    return KResult(K, method, I, seed, stderr, L)


def expected_cdf_single_line(K: float, params: StatParams, epsabs: float = 1e-10) -> float:
    """``E_V F_{d,r}(K^2 / (d <u, V>^2))`` for one fixed unit ``u``, by quadrature.

    With ``<u, V> = cos(phi)`` the angle has density proportional to
    ``sin(phi)^(d-2)`` on ``[0, pi/2]`` (folding the two hemispheres).
    """
    d, r = params.d, params.r
    # integral of sin^(d-2) over [0, pi/2]
    norm = 0.5 * math.sqrt(math.pi) * math.exp(math.lgamma((d - 1) / 2) - math.lgamma(d / 2))

    def integrand(phi):
        cos2 = math.cos(phi) ** 2
        x = K * K / (d * cos2) if cos2 > 0 else math.inf
        Fx = 1.0 if math.isinf(x) else f_cdf(d, r, x)
        return Fx * math.sin(phi) ** (d - 2)

    val, err = integrate.quad(integrand, 0.0, math.pi / 2, epsabs=epsabs, epsrel=1e-12, limit=200)
    if err > 100 * epsabs:
        raise ArithmeticError(f"quadrature did not converge (error estimate {err:.2e})")
    return val / norm


def bonferroni_k(params: StatParams) -> float:
    """Single-line constant at level ``alpha / N``: ``sqrt`` of the ``1 - alpha/N``
    quantile of ``F_{1,r}``.  Looser than `upper_bound_kbar`."""
    return math.sqrt(f_quantile(1, params.r, 1.0 - params.alpha / params.N))


def cap_tail(gamma, d: int):
    """``P(<u, V>^2 > gamma)`` for ``V`` uniform on S^{d-1}; ``<u,V>^2 ~ Beta(1/2, (d-1)/2)``."""
    from scipy import special

    gamma = np.clip(gamma, 0.0, 1.0)
    return special.betaincc(0.5, 0.5 * (d - 1), gamma)


def union_bound_failure(K: float, params: StatParams, epsabs: float = 1e-13) -> float:
    """Union bound on ``P(max_j <u_j, Z>^2 > K^2 s^2)`` for any ``N`` lines.

    Conditional on the F-distributed radial part ``X = (|Z|^2/d) / s^2`` the
    failure event is ``max_j <u_j, V>^2 > gamma`` with ``gamma = K^2/(d X)``;
    its probability is bounded by ``min(1, N * cap_tail(gamma))``.  The
    expectation over ``X`` splits at ``gamma*`` (where ``N * cap_tail = 1``):

        1 - F(K^2/(d gamma*)) + N * int_{K^2/d}^{K^2/(d gamma*)} cap_tail(K^2/(d x)) f(x) dx.
    """
    from scipy import optimize, special

    d, r, N = params.d, params.r, params.N
    y = K * K / d
    if N == 1:
        gstar = 0.0
    else:
        gstar = optimize.brentq(lambda g: float(cap_tail(g, d)) - 1.0 / N, 0.0, 1.0,
                                xtol=1e-15, rtol=1e-15)
    upper = math.inf if gstar == 0.0 else y / gstar
    head = 0.0 if math.isinf(upper) else 1.0 - f_cdf(d, r, upper)

    def integrand(x):
        return float(cap_tail(y / x, d)) * math.exp(float(f_logpdf(d, r, x)))

    val, err = integrate.quad(integrand, y, upper, epsabs=epsabs, epsrel=1e-12, limit=400)
    if err > 1e-9:
        raise ArithmeticError(f"quadrature did not converge (error estimate {err:.2e})")
    return head + N * val


def upper_bound_kbar(params: StatParams, rtol: float = 1e-12) -> KResult:
    """Union-bound constant ``Kbar(d, r, alpha)``: the ``K`` at which
    `union_bound_failure` equals ``alpha``, by bisection.

    Dominates ``f_{d,r,alpha}(L)`` for every set of at most ``N`` lines and
    reduces to the single-line constant when ``N = 1``.
    """
    hi = bonferroni_k(params)  # the uncapped bound is never smaller
    lo = 0.5 * hi
    while union_bound_failure(lo, params) < params.alpha:
        lo *= 0.5
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if union_bound_failure(mid, params) > params.alpha:
            lo = mid
        else:
            hi = mid
    return KResult(0.5 * (lo + hi), "upper_bound", 0, None, 0.0)
