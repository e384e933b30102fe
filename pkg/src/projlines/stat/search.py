"""Monte Carlo maximization of the statistical potential over random line sets."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..geometry import Line, LineSet, canonical_sign
from .potential import (STREAM_GENERATE, STREAM_SCREEN, KResult, MCParams, StatParams, as_seed,
                        binned_k, block_rng, evaluate_statistical_potential, max_sq_projections)

log = logging.getLogger(__name__)

#: histogram resolution of the two screening stages of `find_max`
SCREEN_BINS = (1024, 4096)


@dataclass(frozen=True)
class Uniform:
    """Uniform distribution on the sphere."""


@dataclass(frozen=True)
class ProjectedGaussian:
    """``normalize(mean + sigma Z)`` with ``Z`` standard normal."""

    mean: np.ndarray
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def projected_gaussians(L: LineSet, sigma: float) -> list[ProjectedGaussian]:
    return [ProjectedGaussian(u, sigma) for u in L.vectors]


def _draw(dists, d, rng):
    N = len(dists)
    if all(isinstance(p, Uniform) for p in dists):
        W = rng.standard_normal((N, d))
    elif all(isinstance(p, ProjectedGaussian) for p in dists):
        means = np.array([p.mean.u if isinstance(p.mean, Line) else p.mean for p in dists], dtype=float)
        sig = np.array([p.sigma for p in dists])[:, None]
        W = means + sig * rng.standard_normal((N, d))
    else:
        W = np.empty((N, d))
        for j, p in enumerate(dists):
            z = rng.standard_normal(d)
            W[j] = z if isinstance(p, Uniform) else np.asarray(p.mean, dtype=float) + p.sigma * z
    norms = np.linalg.norm(W, axis=1)
    while np.any(norms < 1e-150):
        bad = norms < 1e-150
        W[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(W, axis=1)
    return canonical_sign(W / norms[:, None])


def generate_random_line_sets(params: StatParams, N1: int, distributions: Sequence, rng,
                              start: int = 0) -> list[LineSet]:
    """``N1`` random sets of ``len(distributions)`` lines, line ``j`` drawn from ``distributions[j]``.

    Set ``i`` is drawn from its own stream, so any slice ``start..start+N1``
    reproduces the corresponding sets of a longer run.  Sets may contain
    coincident lines (a probability-zero event).
    """
    if N1 < 1:
        raise ValueError("N1 must be >= 1")
    seed = as_seed(rng)
    dists = list(distributions)
    out = []
    for i in range(start, start + N1):
        g = block_rng(seed, (STREAM_GENERATE,), i)
        out.append(LineSet(_draw(dists, params.d, g), allow_duplicates=True))
    return out


def _screen(D1, indices, stage, I, nbins, params, seed, workers):
    out = []
    guess = None
    for i in indices:
        c = max_sq_projections(D1[i], I, seed, (STREAM_SCREEN, stage, int(i)), workers)
        k = binned_k(c, params, nbins, guess)
        guess = k  # neighbouring candidates have similar roots
        out.append(k)
    return np.array(out)


def find_max(D1: Sequence[LineSet], N2: int, I1: int, I2: int, I3: int, params: StatParams, rng,
             method: str = "find_max", workers: int | None = None) -> KResult:
    """Three-stage screening for the set of ``D1`` with the largest potential.

    1. estimate every set with ``I1`` samples, keep the ``N2`` best;
    2. re-estimate those with ``I2`` samples, keep the best one;
    3. return its estimate with ``I3`` samples.

    Stages 1 and 2 only rank candidates and use `binned_k`; stage 3 is
    `evaluate_statistical_potential` on the evaluation stream of ``rng``,
    so a single-set ``D1`` reproduces a direct evaluation exactly.
    """
    if not D1:
        raise ValueError("D1 is empty")
    if N2 > len(D1):
        raise ValueError(f"N2={N2} exceeds the number of candidate sets {len(D1)}")
    seed = as_seed(rng)
    if len(D1) == 1:
        winner = 0
        used = 0
    else:
        k1 = _screen(D1, range(len(D1)), 1, I1, SCREEN_BINS[0], params, seed, workers)
        keep = np.argsort(-k1, kind="stable")[:N2]
        k2 = _screen(D1, keep, 2, I2, SCREEN_BINS[1], params, seed, workers)
        winner = int(keep[int(np.argmax(k2))])
        used = I1 * len(D1) + I2 * len(keep)
        log.info("find_max: stage1 best %.6f, stage2 best %.6f (set %d)", k1.max(), k2.max(), winner)
    res = evaluate_statistical_potential(D1[winner], params, I3, seed, workers=workers, method=method)
    res.samples_used += used
    return res


def naive_monte_carlo(params: StatParams, mc: MCParams, rng, workers: int | None = None) -> KResult:
    """Uniformly random candidate sets followed by `find_max`."""
    seed = as_seed(rng)
    D1 = generate_random_line_sets(params, mc.N1, [Uniform()] * params.N, seed)
    return find_max(D1, mc.N2, mc.I1, mc.I2, mc.I3, params, seed, method="naive_mc", workers=workers)


def local_search(L0: LineSet, sigma: float, params: StatParams, mc: MCParams, rng,
                 method: str | None = None, workers: int | None = None) -> KResult:
    """Candidate sets scattered around ``L0`` by projected Gaussians, then `find_max`."""
    if len(L0) != params.N:
        raise ValueError(f"L0 has {len(L0)} lines, expected N={params.N}")
    seed = as_seed(rng)
    D1 = generate_random_line_sets(params, mc.N1, projected_gaussians(L0, sigma), seed)
    if method is None:
        method = "very_local" if sigma < 0.05 else "local"
    return find_max(D1, mc.N2, mc.I1, mc.I2, mc.I3, params, seed, method=method, workers=workers)
