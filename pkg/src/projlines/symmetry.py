"""Finite orthogonal matrix groups and the symmetric line configurations.

`canonical_config` builds the known configurations of ``2^d - 1`` lines for
``d = 2..6`` as unions of group orbits of a few seed vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .geometry import LineSet, canonical_sign, normalize_rows

HASH_GRID = 1e-9
MATRIX_TOL = 1e-10


class GroupTooLarge(RuntimeError):
    pass


@dataclass
class GroupSpec:
    d: int
    generators: list
    tol: float = MATRIX_TOL

    def __post_init__(self):
        gens = [np.asarray(G, dtype=float) for G in self.generators]
        for n, G in enumerate(gens):
            if G.shape != (self.d, self.d):
                raise ValueError(f"generator {n} has shape {G.shape}, expected {(self.d, self.d)}")
            err = np.abs(G.T @ G - np.eye(self.d)).max()
            if err >= 1e-10:
                raise ValueError(f"generator {n} is not orthogonal (|G^T G - I| = {err:.2e})")
        self.generators = gens


@dataclass
class OrbitSpec:
    group: GroupSpec
    seeds: list = field(default_factory=list)

    def __post_init__(self):
        self.seeds = [np.asarray(s, dtype=float) for s in self.seeds]
        for s in self.seeds:
            if not np.any(s):
                raise ValueError("orbit seed must be nonzero")


@dataclass
class CanonicalConfig:
    d: int
    lines: LineSet
    provenance: str
    orbit_sizes: tuple = ()


def _matrix_keys(mats: np.ndarray) -> list[bytes]:
    q = np.rint(mats.reshape(len(mats), -1) / HASH_GRID).astype(np.int64)
    return [row.tobytes() for row in q]


def group_closure(spec: GroupSpec, max_order: int = 200_000) -> np.ndarray:
    """All products of the generators, as an array of shape (order, d, d).

    Breadth-first closure: each frontier is multiplied on the right by every
    generator in one batched product; new elements are recognized by a hash
    of their entries rounded to ``HASH_GRID`` and confirmed by an entrywise
    comparison within ``spec.tol``.

    Raises
    ------
    GroupTooLarge
        If more than ``max_order`` distinct elements appear.
    """
    d = spec.d
    identity = np.eye(d)
    elements = [identity]
    seen = {_matrix_keys(identity[None])[0]: 0}
    frontier = identity[None]
    gens = spec.generators
    while len(frontier):
        new = []
        for G in gens:
            prods = frontier @ G
            for key, P in zip(_matrix_keys(prods), prods):
                idx = seen.get(key)
                if idx is not None:
                    if np.abs(elements[idx] - P).max() > spec.tol:
                        raise RuntimeError("hash collision between distinct group elements")
                    continue
                seen[key] = len(elements)
                elements.append(P)
                new.append(P)
                if len(elements) > max_order:
                    raise GroupTooLarge(f"closure exceeded max_order={max_order}")
        frontier = np.array(new) if new else np.empty((0, d, d))
    return np.array(elements)


def _line_key(u: np.ndarray) -> bytes:
    return np.rint(u / HASH_GRID).astype(np.int64).tobytes()


def orbit_vectors(generators, seed) -> np.ndarray:
    """Canonical unit representatives of the orbit of the line through ``seed``.

    ``generators`` may be the generators only (the orbit is then found by a
    breadth-first search over lines) or a full list of group elements.
    Lines are identified modulo sign; duplicates within ``1e-9`` are merged.
    """
    gens = [np.asarray(G, dtype=float) for G in generators]
    start = canonical_sign(normalize_rows(seed))[0]
    found = [start]
    seen = {_line_key(start)}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            images = canonical_sign(np.array([G @ u for G in gens]))
            for v in images:
                key = _line_key(v)
                if key in seen:
                    continue
                # rounded keys can straddle a grid boundary; confirm by inner product
                if np.max(np.abs(np.array(found) @ v)) > 1.0 - 1e-9:
                    continue
                seen.add(key)
                found.append(v)
                nxt.append(v)
        frontier = nxt
    return np.array(found)


def orbit_lines(group, seed) -> LineSet:
    """Orbit of the line ``seed R`` under ``group`` (generators or all elements)."""
    return LineSet(orbit_vectors(group, seed))


# ---------------------------------------------------------------- generators

def _rot2(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def generators_d2():
    """Dihedral group of order 6: rotation by 2*pi/3 and a reflection."""
    return [_rot2(2 * np.pi / 3), np.diag([1.0, -1.0])]


def generators_d3():
    """Full octahedral group (signed permutations of three coordinates, order 48)."""
    cyc = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    swap = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
    return [cyc, swap, np.diag([-1.0, 1.0, 1.0])]


def generators_d4():
    r3 = sqrt(3.0)
    G1 = -np.eye(4)
    G2 = np.fliplr(np.eye(4))
    G3 = np.diag([-1.0, 1.0, 1.0, 1.0])
    G4 = 0.5 * np.array([[-1, -r3, 0, 0], [r3, -1, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]])
    G5 = 0.5 * np.array([[-1, -r3, 0, 0], [r3, -1, 0, 0], [0, 0, -1, -r3], [0, 0, r3, -1]])
    return [G1, G2, G3, G4, G5]


def generators_d5():
    r3 = sqrt(3.0)
    G1 = -np.eye(5)
    G2 = np.diag([1.0, -1.0, 1.0, -1.0, 1.0])
    G3 = 0.5 * np.array([[2, 0, 0, 0, 0],
                         [0, -1, -r3, 0, 0],
                         [0, r3, -1, 0, 0],
                         [0, 0, 0, -1, -r3],
                         [0, 0, 0, r3, -1]])
    return [G1, G2, G3]


def generators_d6():
    h = 0.5
    a = 1 / sqrt(8.0)
    b = sqrt(3.0 / 8.0)
    c = 1 / sqrt(2.0)
    G1 = np.array([[-h, -h, h, h, 0, 0],
                   [-h, h, 0, 0, a, b],
                   [h, 0, h, 0, c, 0],
                   [h, 0, 0, h, -a, b],
                   [0, a, c, -a, -h, 0],
                   [0, b, 0, b, 0, -h]])
    G2 = np.zeros((6, 6))
    G2[0, 0] = 1
    G2[1, 2] = G2[2, 3] = G2[3, 1] = 1
    G2[4:, 4:] = [[h, -sqrt(3.0) / 2], [sqrt(3.0) / 2, h]]
    return [G1, G2]


GENERATORS = {2: generators_d2, 3: generators_d3, 4: generators_d4,
              5: generators_d5, 6: generators_d6}

#: orders of the symmetry groups generated above
GROUP_ORDERS = {2: 6, 3: 48, 4: 144, 5: 12, 6: 103680}

#: constants of the 31-line configuration in R^5, seven decimals
D5_CONSTANTS = {
    "a1": 0.1386569,
    "b1": 0.6107676, "b2": 0.2652528,
    "c1": 0.6319241, "c2": 0.6489064,
    "d1": 0.0959289, "d2": 0.6048195, "d3": 0.3121361, "d4": 0.6715440,
    "e1": 0.3556342, "e2": 0.0311526, "e3": 0.7210732, "e4": 0.4584122,
    "f1": 0.5842996, "f2": 0.4841533, "f3": 0.3040229, "f4": 0.5287425,
}


def d5_seeds(c=None) -> list[np.ndarray]:
    c = D5_CONSTANTS if c is None else c

    def last(*xs):
        return sqrt(1.0 - sum(x * x for x in xs))

    return [
        np.array([1.0, 0, 0, 0, 0]),
        np.array([0, 1.0, 0, 0, 0]),
        np.array([0, c["a1"], 0, -last(c["a1"]), 0]),
        np.array([c["b1"], 0, c["b2"], 0, last(c["b1"], c["b2"])]),
        np.array([c["c1"], 0, -c["c2"], 0, -last(c["c1"], c["c2"])]),
        np.array([c["d1"], c["d2"], -c["d3"], c["d4"], last(c["d1"], c["d2"], c["d3"], c["d4"])]),
        np.array([c["e1"], c["e2"], c["e3"], -c["e4"], -last(c["e1"], c["e2"], c["e3"], c["e4"])]),
        np.array([c["f1"], -c["f2"], c["f3"], c["f4"], last(c["f1"], c["f2"], c["f3"], c["f4"])]),
    ]


def d5_constants_from_seeds(seeds) -> dict:
    """Inverse of `d5_seeds`: read the constants back off (sign-matched) seed vectors."""
    s = [np.asarray(v, dtype=float) for v in seeds]
    return {
        "a1": s[2][1],
        "b1": s[3][0], "b2": s[3][2],
        "c1": s[4][0], "c2": -s[4][2],
        "d1": s[5][0], "d2": s[5][1], "d3": -s[5][2], "d4": s[5][3],
        "e1": s[6][0], "e2": s[6][1], "e3": s[6][2], "e4": -s[6][3],
        "f1": s[7][0], "f2": -s[7][1], "f3": s[7][2], "f4": s[7][3],
    }


SEEDS = {
    2: [np.array([1.0, 0.0])],
    3: [np.array([1.0, 1.0, 1.0]), np.array([1.0, 0.0, 0.0])],
    4: [np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 1.0, 0])],
    6: [np.array([1.0, 0, 0, 0, 0, 0]), np.array([0, 0, 0, 0, sqrt(3.0), 1.0])],
}

PROVENANCE = {
    2: "three equiangular lines in R^2, one orbit of the dihedral group D3",
    3: "cube vertices (4) and face centers (3), two orbits of O_h",
    4: "two orbits (6 + 9) of a group of order 144",
    5: "Riesz-1 minimizer, eight orbits (1,3,3,3,3,6,6,6) of a group of order 12",
    6: "vertices (36) and 5-face centers (27) of the 1_22 polytope",
}


def orbit_spec(d: int) -> OrbitSpec:
    if d not in GENERATORS:
        raise ValueError(f"no canonical configuration for d={d}; supported: 2..6")
    seeds = d5_seeds() if d == 5 else SEEDS[d]
    return OrbitSpec(GroupSpec(d, GENERATORS[d]()), seeds)


def canonical_config(d: int, refine: bool = False) -> CanonicalConfig:
    """The symmetric configuration of ``2^d - 1`` lines in R^d, ``d = 2..6``.

    With ``refine=True`` (only meaningful for ``d = 5``, whose constants are
    stored to seven decimals) the seven-decimal configuration is polished by
    a local Riesz-1 minimization.
    """
    spec = orbit_spec(d)
    parts = [orbit_vectors(spec.group.generators, s) for s in spec.seeds]
    L = LineSet(np.vstack(parts))
    if len(L) != 2 ** d - 1:
        raise AssertionError(f"built {len(L)} lines for d={d}, expected {2 ** d - 1}")
    cfg = CanonicalConfig(d, L, PROVENANCE[d], tuple(len(p) for p in parts))
    if refine and d == 5:
        cfg = CanonicalConfig(d, refine_d5()[0], PROVENANCE[d] + " (refined)", cfg.orbit_sizes)
    return cfg


def refine_d5(opts=None):
    """Polish the seven-decimal R^5 configuration; return (lines, constants)."""
    from .energy import Kernel
    from .optimize import OptimOptions, minimize_energy

    seeds = d5_seeds()
    spec = orbit_spec(5)
    parts = [orbit_vectors(spec.group.generators, s) for s in seeds]
    opts = opts or OptimOptions(grad_tol=1e-11, max_iters=20000)
    res = minimize_energy(LineSet(np.vstack(parts)), Kernel.riesz(1.0), opts)
    U = res.lines.vectors
    refined = []
    for s in seeds:
        s = s / np.linalg.norm(s)
        ip = U @ s
        j = int(np.argmax(np.abs(ip)))
        refined.append(U[j] * np.sign(ip[j]))
    return res.lines, d5_constants_from_seeds(refined)


def verify_stationarity(L: LineSet, kernels) -> float:
    """Largest tangent-gradient norm of the energy over ``kernels``."""
    from .energy import gradient_norm

    return max(gradient_norm(L, k) for k in kernels)


def is_group(elements: np.ndarray, tol: float = 1e-8, samples: int | None = None,
             rng: np.random.Generator | None = None) -> bool:
    """Check closure under products and inverses.

    Exhaustive over all pairs unless ``samples`` is given, in which case that
    many random pairs are tested.
    """
    keys = {k: i for i, k in enumerate(_matrix_keys(elements))}

    def member(P):
        idx = keys.get(_matrix_keys(P[None])[0])
        return idx is not None and np.abs(elements[idx] - P).max() < tol

    n = len(elements)
    if not all(member(E.T) for E in elements):
        return False
    if samples is None:
        for A in elements:
            prods = elements @ A
            if not all(member(P) for P in prods):
                return False
        return True
    rng = rng or np.random.default_rng(0)
    ii = rng.integers(0, n, samples)
    jj = rng.integers(0, n, samples)
    return all(member(elements[i] @ elements[j]) for i, j in zip(ii, jj))
