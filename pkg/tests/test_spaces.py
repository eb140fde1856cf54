"""Core space container, thickening, validation, exact concentration values,
and serialization round trips."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import spaces
from mmlab.generators import hamming_cube, sphere_sampled, SamplerConfig
from mmlab.spaces import (ConcentrationCurve, FiniteMMSpace, alpha_exact,
                          diameter, load_space, measure, neighborhood,
                          point_space, save_space, space_from_json,
                          space_to_json, validate_space)


def two_point(d=1.0, w=(0.5, 0.5)):
    return FiniteMMSpace(["a", "b"], list(w), dist=[[0.0, d], [d, 0.0]])


def test_point_space_basics():
    x = point_space()
    assert x.n == 1
    assert diameter(x) == 0.0
    assert measure(x, [True]) == 1.0
    assert validate_space(x) == []


def test_weight_normalization_and_rejection():
    with pytest.raises(ValueError):
        two_point(w=(0.5, 0.6))
    with pytest.warns(UserWarning):
        x = two_point(w=(0.5, 0.5 + 1e-10))
    assert abs(x.weight.sum() - 1.0) < 1e-15


def test_neighborhood_closed_threshold():
    x = two_point(d=1.0)
    a = np.array([True, False])
    assert neighborhood(x, a, 0.999).tolist() == [True, False]
    assert neighborhood(x, a, 1.0).tolist() == [True, True]  # closed thickening
    with pytest.raises(ValueError):
        neighborhood(x, a, -0.1)
    with pytest.raises(ValueError):
        neighborhood(x, np.zeros(2, dtype=bool), 0.5)


@settings(max_examples=60, deadline=None)
@given(spaces(), st.floats(0.0, 2.0))
def test_neighborhood_matches_distance_oracle(space, eps):
    mask = np.zeros(space.n, dtype=bool)
    mask[0] = True
    got = neighborhood(space, mask, eps)
    want = space.dist_to_set(mask) <= eps
    assert (got == want).all()


def test_lazy_thickening_agrees_with_materialized():
    # same space twice: lazy kernel backend vs explicit matrix backend
    cfg = SamplerConfig(seed=3, sample_count=300)
    for metric in ("euclidean", "sphere_geodesic"):
        lazy = sphere_sampled(2, cfg, metric="geodesic" if metric == "sphere_geodesic"
                              else "euclidean")
        idx = np.arange(lazy.n)
        dense = FiniteMMSpace(lazy.labels, lazy.weight, dist=lazy.pairwise(idx, idx))
        mask = np.zeros(lazy.n, dtype=bool)
        mask[[0, 17, 101]] = True
        for eps in (0.05, 0.3, 1.0, 3.5):
            assert (lazy.thickened(mask, eps) == dense.thickened(mask, eps)).all()


def test_sphere_geodesic_self_distance_is_exactly_zero():
    x = sphere_sampled(3, SamplerConfig(seed=0, sample_count=64), metric="geodesic")
    assert (np.diag(x.dist) == 0.0).all()


def brute_alpha(space, eps):
    """Independent oracle: direct subset scan with matrix thickenings."""
    d = space.dist
    w = space.weight
    best = None
    for r in range(1, space.n + 1):
        for comb in itertools.combinations(range(space.n), r):
            mask = np.zeros(space.n, dtype=bool)
            mask[list(comb)] = True
            if w[mask].sum() < 0.5 - 1e-12:
                continue
            grown = (d[:, mask] <= eps).any(axis=1)
            mu = w[grown].sum()
            best = mu if best is None else min(best, mu)
    return float(min(max(1.0 - best, 0.0), 0.5))


@settings(max_examples=40, deadline=None)
@given(spaces(max_n=5), st.sampled_from([0.1, 0.5, 0.9, 1.3, 1.8]))
def test_alpha_exact_against_brute_subset_scan(space, eps):
    assert alpha_exact(space, eps) == pytest.approx(brute_alpha(space, eps), abs=1e-12)


def test_alpha_exact_two_point_values():
    x = two_point(d=1.0)
    assert alpha_exact(x, 0.5) == 0.5   # half mass stays put below the gap
    assert alpha_exact(x, 1.0) == 0.0   # closed thickening reaches everything
    x = two_point(d=1.0, w=(0.4, 0.6))
    assert alpha_exact(x, 0.5) == pytest.approx(0.4, abs=1e-12)


def test_alpha_qualification_boundary():
    # 0.5 - 1e-13 sits inside the qualification tolerance, 0.5 - 1e-9 outside
    x = two_point(d=1.0, w=(0.5 - 1e-13, 0.5 + 1e-13))
    assert alpha_exact(x, 0.5) == 0.5
    y = two_point(d=1.0, w=(0.5 - 1e-9, 0.5 + 1e-9))
    assert alpha_exact(y, 0.5) == pytest.approx(0.5 - 1e-9, abs=1e-12)


def test_alpha_exact_rejects_bad_inputs():
    x = two_point()
    with pytest.raises(ValueError):
        alpha_exact(x, 0.0)
    big = hamming_cube(6)
    with pytest.raises(ValueError, match="alpha_lower_bound"):
        alpha_exact(big, 0.3, exhaustive_cap=20)


@settings(max_examples=40, deadline=None)
@given(spaces(max_n=6))
def test_alpha_exact_monotone_in_eps(space):
    grid = np.linspace(0.1, 2.0, 8)
    vals = [alpha_exact(space, e) for e in grid]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    assert all(0.0 <= v <= 0.5 for v in vals)


def test_validate_space_reports_each_axiom():
    d = np.array([[0.0, 1.0], [1.0, 0.0]])
    ok = FiniteMMSpace([0, 1], [0.5, 0.5], dist=d)
    assert validate_space(ok) == []

    bad = d.copy(); bad[0, 1] = 2.0
    out = validate_space(FiniteMMSpace([0, 1], [0.5, 0.5], dist=bad))
    assert any("symmetry" in v for v in out)

    bad = d.copy(); bad[0, 0] = 0.1
    out = validate_space(FiniteMMSpace([0, 1], [0.5, 0.5], dist=bad))
    assert any("self-distance" in v for v in out)

    bad = -d
    out = validate_space(FiniteMMSpace([0, 1], [0.5, 0.5], dist=bad))
    assert any("negative distance" in v for v in out)

    tri = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
    out = validate_space(FiniteMMSpace([0, 1, 2], [1 / 3] * 3, dist=tri))
    assert any("triangle" in v for v in out)


def test_curve_validation_and_csv_roundtrip():
    c = ConcentrationCurve([0.1, 0.2, 0.3], [0.5, 0.25, 0.0], kind="exact")
    back = ConcentrationCurve.from_csv_text(c.to_csv_text())
    assert (back.eps == c.eps).all() and (back.alpha == c.alpha).all()
    assert back.kind == "exact"

    with pytest.raises(ValueError):
        ConcentrationCurve([0.2, 0.1], [0.3, 0.3], kind="exact")
    with pytest.raises(ValueError):
        ConcentrationCurve([0.1, 0.2], [0.2, 0.3], kind="exact")  # increasing
    with pytest.raises(ValueError):
        ConcentrationCurve([0.1], [0.7], kind="exact")
    with pytest.raises(ValueError):
        ConcentrationCurve([0.1], [0.3], kind="whatever")


def test_curve_csv_floats_roundtrip_exactly():
    eps = np.array([0.1, 1 / 3, 0.7000000000000001])
    alpha = np.array([1 / 3, 0.2500000000000001, 1e-17])
    c = ConcentrationCurve(eps, alpha, kind="lower_bound_search")
    back = ConcentrationCurve.from_csv_text(c.to_csv_text())
    assert (back.eps == eps).all()
    assert (back.alpha == np.clip(alpha, 0, 0.5)).all()


@settings(max_examples=25, deadline=None)
@given(spaces())
def test_space_json_roundtrip_matrix(space):
    back = space_from_json(space_to_json(space))
    assert back.labels == space.labels
    assert np.array_equal(back.weight, space.weight)
    assert np.array_equal(back.dist, space.dist)


def test_space_json_roundtrip_lazy_kinds(tmp_path):
    for metric in ("euclidean", "geodesic"):
        x = sphere_sampled(2, SamplerConfig(seed=1, sample_count=40), metric=metric)
        p = tmp_path / f"{metric}.json"
        save_space(x, p)
        back = load_space(p)
        assert back.n == x.n
        idx = np.arange(x.n)
        assert np.allclose(back.pairwise(idx, idx), x.pairwise(idx, idx), atol=1e-12)

    cube = hamming_cube(3)
    back = space_from_json(space_to_json(cube))
    assert np.array_equal(back.dist, cube.dist)
    assert back.labels == cube.labels


def test_measure_and_diameter():
    x = hamming_cube(3)
    mask = np.zeros(8, dtype=bool)
    mask[[0, 7]] = True
    assert measure(x, mask) == pytest.approx(0.25, abs=1e-15)
    assert diameter(x) == 1.0
