import itertools

import numpy as np
import pytest

from projlines.energy import Kernel, gradient_norm
from projlines.geometry import canonical_sign, min_pairwise_distance_sq, pairwise_distance_sq
from projlines.symmetry import (D5_CONSTANTS, GENERATORS, GROUP_ORDERS, GroupSpec, GroupTooLarge,
                                canonical_config, d5_constants_from_seeds, d5_seeds, group_closure,
                                is_group, orbit_lines, orbit_vectors, refine_d5, verify_stationarity)

ORBIT_SIZES = {2: (3,), 3: (4, 3), 4: (6, 9), 5: (1, 3, 3, 3, 3, 6, 6, 6), 6: (36, 27)}


def line_set_key(U, decimals=8):
    return sorted(map(tuple, np.round(canonical_sign(U), decimals) + 0.0))


def test_generator_validation():
    with pytest.raises(ValueError, match="not orthogonal"):
        GroupSpec(2, [np.array([[1.0, 1.0], [0.0, 1.0]])])
    with pytest.raises(ValueError, match="shape"):
        GroupSpec(3, [np.eye(2)])


def test_closure_cyclic():
    c, s = np.cos(2 * np.pi / 7), np.sin(2 * np.pi / 7)
    G = group_closure(GroupSpec(2, [np.array([[c, -s], [s, c]])]))
    assert len(G) == 7
    assert is_group(G)


def test_closure_limit():
    with pytest.raises(GroupTooLarge):
        group_closure(GroupSpec(6, GENERATORS[6]()), max_order=1000)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_group_orders(d):
    G = group_closure(GroupSpec(d, GENERATORS[d]()))
    assert len(G) == GROUP_ORDERS[d]
    assert is_group(G)


def test_group_order_d6():
    G = group_closure(GroupSpec(6, GENERATORS[6]()))
    assert len(G) == 103680
    assert is_group(G, samples=2000, rng=np.random.default_rng(0))


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_canonical_structure(d):
    cfg = canonical_config(d)
    assert len(cfg.lines) == 2 ** d - 1
    assert cfg.orbit_sizes == ORBIT_SIZES[d]
    assert cfg.lines.d == d


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_config_invariant_under_group(d):
    L = canonical_config(d).lines
    ref = line_set_key(L.vectors)
    for G in group_closure(GroupSpec(d, GENERATORS[d]())):
        assert line_set_key(L.vectors @ G.T) == ref


def test_orbit_from_full_group_matches_generators():
    gens = GENERATORS[4]()
    G = group_closure(GroupSpec(4, gens))
    seed = np.array([0.0, 1.0, 1.0, 0.0])
    assert line_set_key(orbit_vectors(gens, seed)) == line_set_key(orbit_vectors(G, seed))
    assert len(orbit_lines(gens, seed)) == 9


def test_cube_distances():
    t = pairwise_distance_sq(canonical_config(3).lines.vectors)
    vals = np.unique(np.round(t[np.triu_indices(7, 1)], 12))
    assert np.allclose(vals, [2 / 3, 8 / 9, 1.0], atol=1e-12)


@pytest.mark.parametrize("d,expected", [(2, 0.75), (3, 2 / 3), (4, 0.625), (6, 0.625)])
def test_min_distance(d, expected):
    assert min_pairwise_distance_sq(canonical_config(d).lines) == pytest.approx(expected, abs=1e-12)


def test_d6_min_distance_brute_force():
    # 63 * 62 / 2 = 1953 pairs, plain loop
    U = canonical_config(6).lines.vectors
    best = min(1 - float(np.dot(U[i], U[j])) ** 2 for i, j in itertools.combinations(range(63), 2))
    assert best == pytest.approx(5 / 8, abs=1e-12)
    # the 36 vertex lines alone sit at 3/4
    t = pairwise_distance_sq(U[:36])
    assert t[np.triu_indices(36, 1)].min() == pytest.approx(0.75, abs=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 4.0])
def test_d4_stationary_for_riesz(s):
    assert gradient_norm(canonical_config(4).lines, Kernel.riesz(s)) < 1e-12


def test_d6_stationary():
    L = canonical_config(6).lines
    assert verify_stationarity(L, [Kernel.distance(), Kernel.riesz(1.0), Kernel.log()]) < 1e-11


def test_d5_constants_roundtrip():
    back = d5_constants_from_seeds([s / np.linalg.norm(s) for s in d5_seeds()])
    for key, val in D5_CONSTANTS.items():
        assert back[key] == pytest.approx(val, abs=1e-15)


def test_d5_refinement_stays_close_to_published():
    L, consts = refine_d5()
    assert gradient_norm(L, Kernel.riesz(1.0)) < 1e-10
    for key, val in D5_CONSTANTS.items():
        assert abs(consts[key] - val) < 5e-7, key
    # the seven-decimal version is stationary only to the rounding of its constants
    assert gradient_norm(canonical_config(5).lines, Kernel.riesz(1.0)) < 1e-4


def test_unsupported_dimension():
    with pytest.raises(ValueError):
        canonical_config(7)
