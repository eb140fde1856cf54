"""Shared test instances: random finite metric-measure spaces, 1-Lipschitz
data, and random measures, both as hypothesis strategies and as plain seeded
constructors for the bulk randomized sweeps."""

import numpy as np
from hypothesis import strategies as st

from mmlab.spaces import FiniteMMSpace


def normalized(raw):
    w = np.asarray(raw, dtype=float)
    return w / w.sum()


def cloud_metric(points):
    p = np.asarray(points, dtype=float)
    return np.linalg.norm(p[:, None] - p[None], axis=-1)


def perturbed_metric(offdiag, n):
    """d = 1 + r with r in [0, 0.9]: triangle inequality holds for free
    because every two-leg path is at least 2 > max distance 1.9."""
    d = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    d[iu] = 1.0 + np.asarray(offdiag, dtype=float)
    return d + d.T


def mcshane_envelope(raw, d):
    """Largest 1-Lipschitz function below the raw values: exactly 1-Lipschitz."""
    v = np.asarray(raw, dtype=float)
    return (v[None, :] + d).min(axis=1)


@st.composite
def spaces(draw, min_n=2, max_n=8):
    n = draw(st.integers(min_n, max_n))
    if draw(st.booleans()):
        pts = draw(st.sets(st.tuples(st.integers(-8, 8), st.integers(-8, 8)),
                           min_size=n, max_size=n))
        d = cloud_metric(sorted(pts))
    else:
        k = n * (n - 1) // 2
        vals = draw(st.lists(st.integers(0, 9), min_size=k, max_size=k))
        d = perturbed_metric(np.asarray(vals, dtype=float) / 10.0, n)
    raw = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    return FiniteMMSpace(list(range(n)), normalized(raw), dist=d)


@st.composite
def spaces_with_lipschitz(draw, min_n=2, max_n=8):
    space = draw(spaces(min_n=min_n, max_n=max_n))
    raw = draw(st.lists(st.integers(-20, 20), min_size=space.n, max_size=space.n))
    f = mcshane_envelope(np.asarray(raw, dtype=float) / 7.0, space.dist)
    return space, f


@st.composite
def measures_on(draw, n):
    raw = draw(st.lists(st.integers(0, 9), min_size=n, max_size=n)
               .filter(lambda v: sum(v) > 0))
    return normalized(raw)


def random_space(rng, n):
    """Seeded random space mirroring the strategy mix above."""
    if rng.integers(2):
        pts = rng.integers(-50, 51, size=(n, 2))
        pts += np.arange(n)[:, None] * 200  # force distinct points
        d = cloud_metric(pts)
    else:
        d = perturbed_metric(rng.integers(0, 10, size=n * (n - 1) // 2) / 10.0, n)
    w = normalized(rng.integers(1, 10, size=n))
    return FiniteMMSpace(list(range(n)), w, dist=d)


def random_lipschitz(rng, space):
    raw = rng.uniform(-3.0, 3.0, size=space.n)
    return mcshane_envelope(raw, space.dist)


def random_measure(rng, n):
    return normalized(rng.integers(1, 10, size=n))
