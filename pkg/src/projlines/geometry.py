"""Lines through the origin in R^d, represented by sign-canonical unit vectors.

A line ``uR`` is stored as the unit vector ``u`` whose first nonzero
coordinate is positive, so that ``u`` and ``-u`` give the same object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

#: coordinates with magnitude below this count as zero when fixing the sign
SIGN_ZERO = 1e-14
#: squared chordal distances at or below this mean the lines coincide
COINCIDENT_TOL = 1e-20


class DegenerateDirection(ValueError):
    pass


def canonical_sign(vectors: np.ndarray) -> np.ndarray:
    """Flip rows so that the first coordinate above ``SIGN_ZERO`` is positive."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    nonzero = np.abs(vectors) > SIGN_ZERO
    first = np.argmax(nonzero, axis=1)
    lead = vectors[np.arange(len(vectors)), first]
    signs = np.where(lead < 0, -1.0, 1.0)
    # -0.0 would survive the multiply and break byte-level comparisons
    return vectors * signs[:, None] + 0.0


def normalize_rows(vectors: np.ndarray) -> np.ndarray:
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        bad = int(np.flatnonzero((norms == 0) | ~np.isfinite(norms))[0])
        raise DegenerateDirection(f"degenerate direction at row {bad}")
    return vectors / norms[:, None]


@dataclass(frozen=True, eq=False)
class Line:
    """A single line ``uR``; ``u`` is unit length with canonical sign."""

    u: np.ndarray

    @property
    def d(self) -> int:
        return self.u.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Line):
            return NotImplemented
        return self.d == other.d and bool(np.array_equal(self.u, other.u))

    def __hash__(self):
        return hash(self.u.tobytes())

    def __repr__(self):
        return f"Line({np.array2string(self.u, precision=6)})"


def line_from_vector(v) -> Line:
    """Return the line spanned by the nonzero vector ``v``.

    Raises
    ------
    DegenerateDirection
        If ``v`` is the zero vector.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size < 1 or not np.any(v):
        raise DegenerateDirection("degenerate direction")
    u = canonical_sign(normalize_rows(v))[0]
    u.setflags(write=False)
    return Line(u)


def chordal_distance_sq(a: Line, b: Line) -> float:
    """Squared chordal distance ``1 - <u, v>^2`` between two lines."""
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} != {b.d}")
    ip = float(np.dot(a.u, b.u))
    return min(max(1.0 - ip * ip, 0.0), 1.0)


class LineSet:
    """An ordered collection of ``M`` lines in R^d.

    Parameters
    ----------
    vectors : array_like, shape (M, d)
        Representative vectors (any nonzero length, any sign).
    allow_duplicates : bool
        Random line generators may produce coincident lines; everything else
        is rejected at construction.
    normalize : bool
        ``False`` keeps the given (already unit) coordinates bit for bit and
        only fixes signs.
    """

    def __init__(self, vectors, allow_duplicates: bool = False, normalize: bool = True):
        arr = np.asarray(vectors, dtype=float)
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise ValueError(f"expected an (M, d) array with d >= 2, got shape {arr.shape}")
        arr = canonical_sign(normalize_rows(arr) if normalize else arr)
        arr.setflags(write=False)
        self.vectors = arr
        if not allow_duplicates and len(arr) > 1:
            t = pairwise_distance_sq(arr)
            np.fill_diagonal(t, np.inf)
            i, j = np.unravel_index(np.argmin(t), t.shape)
            if t[i, j] <= COINCIDENT_TOL:
                raise ValueError(f"lines {min(i, j)} and {max(i, j)} coincide")

    @classmethod
    def from_lines(cls, lines: Sequence[Line], allow_duplicates: bool = False) -> "LineSet":
        if not lines:
            raise ValueError("empty line set")
        dims = {ln.d for ln in lines}
        if len(dims) != 1:
            raise ValueError(f"lines of mixed dimension {sorted(dims)}")
        return cls(np.stack([ln.u for ln in lines]), allow_duplicates=allow_duplicates)

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def lines(self) -> list[Line]:
        return [Line(u) for u in self.vectors]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def __iter__(self) -> Iterator[Line]:
        return iter(self.lines)

    def __getitem__(self, i) -> Line:
        return Line(self.vectors[i])

    def __repr__(self):
        return f"LineSet(d={self.d}, M={len(self)})"

    def transformed(self, Q: np.ndarray) -> "LineSet":
        """Apply the orthogonal matrix ``Q`` to every line."""
        return LineSet(self.vectors @ np.asarray(Q).T)

    def union(self, other: "LineSet") -> "LineSet":
        if other.d != self.d:
            raise ValueError(f"dimension mismatch: {self.d} != {other.d}")
        return LineSet(np.vstack([self.vectors, other.vectors]))


def pairwise_distance_sq(U: np.ndarray) -> np.ndarray:
    """Matrix of squared chordal distances between the rows of ``U``."""
    G = U @ U.T
    return np.clip(1.0 - G * G, 0.0, 1.0)


def min_pairwise_distance_sq(L: LineSet) -> float:
    """Smallest squared chordal distance over unordered pairs of ``L``."""
    if len(L) < 2:
        raise ValueError("need at least 2 lines")
    t = pairwise_distance_sq(L.vectors)
    iu = np.triu_indices(len(L), k=1)
    return float(t[iu].min())


def sample_uniform_sphere(rng: np.random.Generator, d: int, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on the unit sphere S^{d-1} via normalized Gaussians."""
    if d < 2:
        raise ValueError("d must be at least 2")
    n = 1 if size is None else size
    out = rng.standard_normal((n, d))
    norms = np.linalg.norm(out, axis=1)
    bad = norms < 1e-150
    while np.any(bad):
        out[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(out, axis=1)
        bad = norms < 1e-150
    out /= norms[:, None]
    return out[0] if size is None else out


def sample_projected_gaussian(rng: np.random.Generator, mean, sigma: float,
                              size: int | None = None) -> np.ndarray:
    """Normalize ``mean + sigma * Z`` for isotropic standard Gaussian ``Z``.

    ``mean`` may be a `Line` or a unit vector.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    mu = mean.u if isinstance(mean, Line) else np.asarray(mean, dtype=float)
    n = 1 if size is None else size
    w = mu + sigma * rng.standard_normal((n, mu.shape[0]))
    norms = np.linalg.norm(w, axis=1)
    bad = norms < 1e-150
    while np.any(bad):
        w[bad] = mu + sigma * rng.standard_normal((int(bad.sum()), mu.shape[0]))
        norms = np.linalg.norm(w, axis=1)
        bad = norms < 1e-150
    w /= norms[:, None]
    return w[0] if size is None else w


def random_lineset(rng: np.random.Generator, d: int, M: int, min_distance_sq: float = 0.0,
                   max_tries: int = 1000) -> LineSet:
    """``M`` uniform random lines, redrawn until every pair exceeds ``min_distance_sq``."""
    for _ in range(max_tries):
        U = sample_uniform_sphere(rng, d, M)
        if M < 2:
            return LineSet(U)
        t = pairwise_distance_sq(U)
        np.fill_diagonal(t, np.inf)
        if t.min() > max(min_distance_sq, COINCIDENT_TOL):
            return LineSet(U)
    raise RuntimeError(f"could not draw {M} lines in R^{d} with min distance^2 > {min_distance_sq}")
