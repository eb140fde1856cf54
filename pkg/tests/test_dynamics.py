"""Isometric actions, essential sets under translated thickenings, the
block-sphere demonstration, and exhaustive monochromatic-subset verification."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import normalized
from mmlab.dynamics import (LEADER_THRESHOLD, ColoredHypergraph, Cover,
                            IsometricAction, concentration_property_check,
                            find_monochromatic, fixed_points, is_essential,
                            leader_certificate, leader_empirical,
                            ramsey_verify, translate_commutation_check,
                            translate_mask)
from mmlab.generators import hamming_cube, symmetric_group
from mmlab.spaces import FiniteMMSpace


# -- construction helpers ------------------------------------------------------

def cube_bit_rotation(n):
    """Point permutation of the n-cube induced by rotating coordinates."""
    idx = np.arange(1 << n)
    rot = ((idx << 1) | (idx >> (n - 1))) & ((1 << n) - 1)
    return rot


def left_translations(group_space):
    """Point permutations of a permutation-group space under left composition."""
    words = group_space.points.astype(int)
    index = {tuple(w): i for i, w in enumerate(words)}
    perms = []
    for g in words:
        perms.append(np.array([index[tuple(g[w])] for w in words]))
    return perms


def random_fixed_point_action(rng, n, n_gens=2):
    """Action fixing point 0 with a metric built constant on pair orbits, so
    invariance is exact in floats."""
    gens = [np.concatenate(([0], 1 + rng.permutation(n - 1)))
            for _ in range(n_gens)]
    orbit = -np.ones((n, n), dtype=int)
    next_id = 0
    for i in range(n):
        for j in range(i + 1, n):
            if orbit[i, j] >= 0:
                continue
            stack = [(i, j)]
            orbit[i, j] = orbit[j, i] = next_id
            while stack:
                a, b = stack.pop()
                for g in gens:
                    x, y = int(g[a]), int(g[b])
                    if orbit[x, y] < 0:
                        orbit[x, y] = orbit[y, x] = next_id
                        stack.append((x, y))
            next_id += 1
    vals = rng.integers(0, 10, size=next_id) / 10.0
    d = 1.0 + vals[orbit]
    np.fill_diagonal(d, 0.0)
    w = normalized(rng.integers(1, 10, size=n))
    space = FiniteMMSpace(list(range(n)), w, dist=d)
    return IsometricAction(space, gens)


def random_cover(rng, n, parts):
    assign = rng.integers(0, parts, size=n)
    assign[:parts] = np.arange(parts)  # no empty parts
    return Cover([assign == p for p in range(parts)])


# -- action and cover validation -------------------------------------------------

def test_isometric_action_accepts_cube_rotation():
    cube = hamming_cube(3)
    action = IsometricAction(cube, [cube_bit_rotation(3)])
    assert len(action.elements) == 1


def test_isometric_action_rejects_non_isometry():
    d = np.array([[0.0, 1.0, 2.2], [1.0, 0.0, 1.2], [2.2, 1.2, 0.0]])
    x = FiniteMMSpace([0, 1, 2], [1 / 3] * 3, dist=d)
    with pytest.raises(ValueError, match="does not preserve the metric"):
        IsometricAction(x, [np.array([2, 1, 0])])
    # a loose tolerance lets the corrupted element through
    action = IsometricAction(x, [np.array([2, 1, 0])], atol=1.0)
    assert len(action.elements) == 1


def test_isometric_action_rejects_non_permutation():
    cube = hamming_cube(2)
    with pytest.raises(ValueError):
        IsometricAction(cube, [np.array([0, 0, 1, 2])])


def test_cover_must_partition():
    with pytest.raises(ValueError):
        Cover([[True, False], [False, False]])
    with pytest.raises(ValueError):
        Cover([[True, True], [False, True]])
    c = Cover([[True, False], [False, True]])
    assert len(c.parts) == 2


def test_translate_mask_is_the_image():
    cube = hamming_cube(3)
    rot = cube_bit_rotation(3)
    action = IsometricAction(cube, [rot])
    mask = np.zeros(8, dtype=bool)
    mask[[1, 3]] = True
    out = translate_mask(action, mask, 0)
    assert sorted(np.flatnonzero(out)) == sorted(rot[[1, 3]])


def test_fixed_points_of_bit_rotation():
    cube = hamming_cube(3)
    action = IsometricAction(cube, [cube_bit_rotation(3)])
    assert list(fixed_points(action)) == [0, 7]  # all-zeros and all-ones


# -- essential sets ----------------------------------------------------------------

def test_part_containing_a_fixed_point_is_essential():
    rng = np.random.default_rng(0)
    for _ in range(25):
        n = int(rng.integers(4, 9))
        action = random_fixed_point_action(rng, n)
        eps = float(rng.uniform(0.0, 0.5))
        family = list(range(len(action.elements)))
        cover = random_cover(rng, n, int(rng.integers(2, 4)))
        part_with_fp = next(p for p in cover.parts if p[0])
        res = is_essential(action, part_with_fp, eps, family)
        assert res.essential
        assert res.witness == 0  # the fixed point itself sits in every translate
        check = concentration_property_check(action, cover, eps, family)
        assert check.holds


def test_full_translate_family_on_small_group_reconstruction():
    # permutations of 4 symbols with displaced-fraction distance; the cover by
    # first-symbol value has measure-1/4 parts whose 0.2-thickening is itself,
    # and translating any part around kills the common intersection
    space = symmetric_group(4)
    perms = left_translations(space)
    action = IsometricAction(space, perms)
    words = space.points.astype(int)
    cover = Cover([words[:, 0] == v for v in range(4)])
    family = list(range(len(perms)))

    res = concentration_property_check(action, cover, 0.2, family)
    assert not res.holds
    assert res.essential_part is None
    for part in cover.parts:
        assert not is_essential(action, part, 0.2, family).essential

    # past the smallest positive distance the thickening floods the space
    res = concentration_property_check(action, cover, 0.6, family)
    assert res.holds
    assert res.essential_part == 0


def test_high_mass_thickening_meets_all_translates():
    # with uniform weights each translate keeps the same mass, so mass above
    # 1 - 1/m forces a common point across any m translates
    cube = hamming_cube(3)
    rot = cube_bit_rotation(3)
    action = IsometricAction(cube, [rot, rot[rot], np.arange(8)])
    ball = np.bitwise_count(np.arange(8)) <= 1
    family = [0, 1, 2]
    from mmlab.spaces import measure, neighborhood
    grown = neighborhood(cube, ball, 0.34)
    assert measure(cube, grown) > 1 - 1 / len(family)
    assert is_essential(action, ball, 0.34, family).essential


def test_translate_commutation():
    cube = hamming_cube(3)
    action = IsometricAction(cube, [cube_bit_rotation(3)])
    rng = np.random.default_rng(2)
    for _ in range(20):
        mask = rng.integers(0, 2, size=8).astype(bool)
        if not mask.any():
            mask[0] = True
        eps = float(rng.uniform(0, 1))
        assert translate_commutation_check(action, mask, eps, 0)

    # the deliberately corrupted element from above fails to commute
    d = np.array([[0.0, 1.0, 2.2], [1.0, 0.0, 1.2], [2.2, 1.2, 0.0]])
    x = FiniteMMSpace([0, 1, 2], [1 / 3] * 3, dist=d)
    bad = IsometricAction(x, [np.array([2, 1, 0])], atol=1.0)
    mask = np.array([True, False, False])
    assert not translate_commutation_check(bad, mask, 1.0, 0)


def test_essential_is_monotone_in_eps():
    rng = np.random.default_rng(3)
    action = random_fixed_point_action(rng, 7)
    family = list(range(len(action.elements)))
    mask = np.zeros(7, dtype=bool)
    mask[[2, 4]] = True  # avoids the fixed point on purpose
    flags = [is_essential(action, mask, eps, family).essential
             for eps in (0.0, 0.4, 0.95, 1.5, 2.0)]
    assert flags == sorted(flags)  # False can only turn True as eps grows
    assert flags[-1]  # beyond the diameter everything is essential


# -- block-sphere demonstration -----------------------------------------------------

def test_leader_threshold_value():
    want = math.sqrt(2.0) / 2.0 - math.sqrt(3.0) / 3.0
    assert LEADER_THRESHOLD == want
    assert abs(LEADER_THRESHOLD - 0.1297565119969216) < 1e-15


def test_leader_certificate_boundary():
    assert leader_certificate(0.1).inessential_certified
    assert leader_certificate(LEADER_THRESHOLD - 1e-9).inessential_certified
    assert not leader_certificate(LEADER_THRESHOLD).inessential_certified
    assert not leader_certificate(0.2).inessential_certified
    assert leader_certificate(0.1).threshold == LEADER_THRESHOLD
    with pytest.raises(ValueError):
        leader_certificate(0.0)


def test_leader_empirical_small_run():
    res = leader_empirical(30, 2000, 0.12, seed=1)
    assert res.violations == 0
    assert res.sample_count == 2000
    again = leader_empirical(30, 2000, 0.12, seed=1)
    assert again.violations == res.violations


def test_leader_empirical_input_validation():
    with pytest.raises(ValueError, match="divisible"):
        leader_empirical(10, 100, 0.12)
    with pytest.raises(ValueError):
        leader_empirical(30, 100, LEADER_THRESHOLD + 0.01)


# -- monochromatic subsets -------------------------------------------------------------

def brute_monochromatic_exists(n, k, colors, l):
    subsets = list(itertools.combinations(range(n), k))
    cmap = dict(zip(subsets, colors))
    for big in itertools.combinations(range(n), l):
        seen = {cmap[s] for s in itertools.combinations(big, k)}
        if len(seen) == 1:
            return True
    return False


def test_colored_hypergraph_basics():
    h = ColoredHypergraph(4, 2, 2, [0, 1, 0, 1, 0, 1])
    assert h.color_of((0, 1)) == 0
    assert h.color_of((2, 3)) == 1
    with pytest.raises(ValueError):
        ColoredHypergraph(4, 2, 2, [0, 1])          # wrong length
    with pytest.raises(ValueError):
        ColoredHypergraph(4, 2, 2, [0, 2] * 3)      # color out of range


def test_find_monochromatic_vacuous_below_k():
    h = ColoredHypergraph(4, 2, 2, [0, 1, 0, 1, 0, 1])
    mask = find_monochromatic(h, 1)
    assert mask is not None and mask.sum() == 1


def test_find_monochromatic_on_pentagon_coloring():
    # 5-cycle edges one color, diagonals the other: no single-colored triangle
    edges = list(itertools.combinations(range(5), 2))
    cycle = {(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)}
    colors = [0 if e in cycle else 1 for e in edges]
    h = ColoredHypergraph(5, 2, 2, colors)
    assert find_monochromatic(h, 3) is None
    assert brute_monochromatic_exists(5, 2, colors, 3) is False


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=15, max_size=15))
def test_find_monochromatic_agrees_with_brute_force(colors):
    h = ColoredHypergraph(6, 2, 2, colors)
    mask = find_monochromatic(h, 3)
    exists = brute_monochromatic_exists(6, 2, colors, 3)
    assert (mask is not None) == exists
    if mask is not None:
        members = np.flatnonzero(mask)
        assert members.shape[0] == 3
        seen = {h.color_of(s) for s in itertools.combinations(members.tolist(), 2)}
        assert len(seen) == 1


def test_ramsey_transition_for_triangles():
    below = ramsey_verify(2, 3, 2, 5)
    assert not below.all_colorings_contain
    cx = below.counterexample
    assert cx is not None and len(cx.colors) == 10
    assert find_monochromatic(cx, 3) is None
    assert cx.colors[0] == 0  # canonical first symbol

    above = ramsey_verify(2, 3, 2, 6)
    assert above.all_colorings_contain
    assert above.counterexample is None


def test_ramsey_counterexample_is_deterministic():
    a = ramsey_verify(2, 3, 2, 5)
    b = ramsey_verify(2, 3, 2, 5)
    assert np.array_equal(a.counterexample.colors, b.counterexample.colors)


def test_ramsey_pigeonhole_case():
    # k=1 is the pigeonhole principle: r(l-1)+1 points force l alike
    assert ramsey_verify(1, 3, 2, 5).all_colorings_contain
    assert not ramsey_verify(1, 3, 2, 4).all_colorings_contain


def test_ramsey_degenerate_cases():
    assert ramsey_verify(2, 3, 1, 3).all_colorings_contain   # one color only
    assert not ramsey_verify(2, 3, 2, 2).all_colorings_contain  # l > n
    with pytest.raises(ValueError):
        ramsey_verify(2, 3, 2, 30)  # enumeration blow-up rejected
    with pytest.raises(ValueError):
        ramsey_verify(0, 3, 2, 5)
