"""Finite group actions on mm-spaces: essential sets, the concentration
property as a certificate check, fixed points, the coordinate-block
reconstruction of inessential sets on high-dimensional spheres, and an
exhaustive Ramsey engine."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .spaces import _as_mask, neighborhood

_SAMPLE_BLOCK = 8192

LEADER_THRESHOLD = math.sqrt(2.0) / 2.0 - math.sqrt(3.0) / 3.0


@dataclass
class IsometricAction:
    """Finite list of point permutations preserving the metric.

    Closure under composition is not required; any finite subset of a group
    is acceptable.  Each permutation must preserve the distance matrix
    exactly (atol 0 by default), which holds for label-structure-derived
    metrics; pass atol for metrics carrying independent float noise.
    """
    space: object
    elements: list
    names: list = None
    atol: float = 0.0

    def __post_init__(self):
        n = self.space.n
        self.elements = [np.asarray(p, dtype=np.intp).reshape(-1) for p in self.elements]
        ident = np.arange(n)
        d = self.space.dist
        for idx, p in enumerate(self.elements):
            if p.shape != (n,) or not np.array_equal(np.sort(p), ident):
                raise ValueError(f"element {idx} is not a permutation of {n} points")
            moved = d[np.ix_(p, p)]
            ok = np.array_equal(moved, d) if self.atol == 0.0 \
                else np.allclose(moved, d, atol=self.atol)
            if not ok:
                raise ValueError(f"element {idx} does not preserve the metric")
        if self.names is None:
            self.names = [f"g{i}" for i in range(len(self.elements))]


@dataclass
class Cover:
    """Partition of a space's points into disjoint parts covering everything."""
    parts: list

    def __post_init__(self):
        if not self.parts:
            raise ValueError("cover needs at least one part")
        self.parts = [np.asarray(p, dtype=bool) for p in self.parts]
        counts = np.sum(self.parts, axis=0)
        if (counts != 1).any():
            raise ValueError("cover parts must be disjoint and exhaustive")


@dataclass(frozen=True)
class EssentialResult:
    essential: bool
    witness: object  # point index or None


@dataclass(frozen=True)
class CoverCheckResult:
    holds: bool
    essential_part: object  # part index or None
    eps: float
    family: tuple


def translate_mask(action, mask, g):
    """Image of a point set under element g: point i moves to perm[i]."""
    perm = action.elements[g]
    out = np.zeros_like(np.asarray(mask, dtype=bool))
    out[perm] = np.asarray(mask, dtype=bool)
    return out


def is_essential(action, mask, eps, family):
    """Whether the translates of the eps-thickening under the family share a
    common point; returns one such point when they do."""
    mask = _as_mask(action.space, mask)
    if not mask.any():
        raise ValueError("empty set has no neighborhood")
    nb = neighborhood(action.space, mask, eps)
    inter = np.ones(action.space.n, dtype=bool)
    for g in family:
        inter &= translate_mask(action, nb, g)
    hit = np.flatnonzero(inter)
    if hit.shape[0]:
        return EssentialResult(essential=True, witness=int(hit[0]))
    return EssentialResult(essential=False, witness=None)


def translate_commutation_check(action, mask, eps, g):
    """True iff translating commutes with thickening for this element; holds
    for every isometry, so a False return flags a corrupted action."""
    mask = _as_mask(action.space, mask)
    lhs = translate_mask(action, neighborhood(action.space, mask, eps), g)
    rhs = neighborhood(action.space, translate_mask(action, mask, g), eps)
    return bool(np.array_equal(lhs, rhs))


def concentration_property_check(action, cover, eps, family):
    """Certificate check of the concentration property for one cover, one eps,
    one family: does some part have essential translated thickenings?  The
    result names the checked pair; it never claims the full quantifier over
    all eps values and families."""
    family = tuple(int(g) for g in family)
    for idx, part in enumerate(cover.parts):
        if not part.any():
            continue
        if is_essential(action, part, eps, family).essential:
            return CoverCheckResult(holds=True, essential_part=idx,
                                    eps=eps, family=family)
    return CoverCheckResult(holds=False, essential_part=None,
                            eps=eps, family=family)


def fixed_points(action):
    """Points fixed by every element."""
    n = action.space.n
    fixed = np.ones(n, dtype=bool)
    for p in action.elements:
        fixed &= p == np.arange(n)
    return [int(i) for i in np.flatnonzero(fixed)]


# -- block reconstruction of inessential sets on spheres ----------------------

@dataclass(frozen=True)
class LeaderCertificate:
    inessential_certified: bool
    threshold: float


@dataclass(frozen=True)
class LeaderEmpirical:
    violations: int
    sample_count: int
    eps: float


def leader_certificate(eps):
    """Certifies emptiness of the triple-translate intersection for small eps.

    Three disjoint coordinate blocks cannot all carry squared mass at least
    (sqrt(2)/2 - eps)^2 on a unit vector once 3*(sqrt(2)/2 - eps)^2 > 1,
    i.e. once eps < sqrt(2)/2 - sqrt(3)/3.  Above the threshold nothing is
    claimed."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return LeaderCertificate(inessential_certified=bool(eps < LEADER_THRESHOLD),
                             threshold=LEADER_THRESHOLD)


def leader_empirical(dim_half, sample_count, eps, seed=0):
    """Samples unit vectors in dimension 2*dim_half and counts those whose
    projections onto all three equal coordinate blocks have norm at least
    sqrt(2)/2 - eps.  The Pythagorean argument makes the count exactly zero
    whenever eps is below the certificate threshold."""
    d = 2 * dim_half
    if d % 6 != 0:
        raise ValueError("2*dim_half must be divisible by 6 for three equal blocks")
    if eps >= LEADER_THRESHOLD:
        raise ValueError("eps must be below the certificate threshold")
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    third = d // 3
    level_sq = (math.sqrt(2.0) / 2.0 - eps) ** 2
    violations = 0
    done = 0
    block = 0
    while done < sample_count:
        take = min(_SAMPLE_BLOCK, sample_count - done)
        rng = np.random.default_rng([seed, block])
        g = rng.standard_normal((take, d))
        norms = np.linalg.norm(g, axis=1)
        while (norms == 0).any():
            bad = norms == 0
            g[bad] = rng.standard_normal((int(bad.sum()), d))
            norms = np.linalg.norm(g, axis=1)
        g /= norms[:, None]
        sq = g * g
        ok = np.ones(take, dtype=bool)
        for b in range(3):
            ok &= sq[:, b * third:(b + 1) * third].sum(axis=1) >= level_sq
        violations += int(ok.sum())
        done += take
        block += 1
    return LeaderEmpirical(violations=violations, sample_count=sample_count, eps=eps)


# -- finite Ramsey engine ------------------------------------------------------

@dataclass
class ColoredHypergraph:
    """Coloring of all k-subsets of range(n) with colors 0..r-1, stored over
    the lexicographic subset order."""
    n: int
    k: int
    r: int
    colors: np.ndarray

    def __post_init__(self):
        self.colors = np.asarray(self.colors, dtype=np.int64).reshape(-1)
        expect = math.comb(self.n, self.k)
        if self.colors.shape[0] != expect:
            raise ValueError(f"{self.colors.shape[0]} colors for {expect} subsets")
        if self.colors.size and ((self.colors < 0) | (self.colors >= self.r)).any():
            raise ValueError("colors out of range")
        self._index = {s: i for i, s in
                       enumerate(itertools.combinations(range(self.n), self.k))}

    def color_of(self, subset):
        return int(self.colors[self._index[tuple(sorted(subset))]])


def find_monochromatic(h, l):
    """Lexicographically smallest l-subset whose k-subsets all share one
    color, or None.  Depth-first search pruning any partial set as soon as a
    completed k-subset breaks the established color."""
    if l > h.n:
        raise ValueError("l exceeds the ground set")
    if l < h.k:
        mask = np.zeros(h.n, dtype=bool)
        mask[:l] = True  # no k-subsets to constrain
        return mask

    def extend(chosen, color, start):
        if len(chosen) == l:
            return chosen
        for v in range(start, h.n - (l - len(chosen)) + 1):
            col = color
            ok = True
            if len(chosen) >= h.k - 1:
                for rest in itertools.combinations(chosen, h.k - 1):
                    c = h.color_of(rest + (v,))
                    if col is None:
                        col = c
                    elif c != col:
                        ok = False
                        break
            if ok:
                got = extend(chosen + (v,), col, v + 1)
                if got is not None:
                    return got
        return None

    got = extend(tuple(), None, 0)
    if got is None:
        return None
    mask = np.zeros(h.n, dtype=bool)
    mask[list(got)] = True
    return mask


@dataclass(frozen=True)
class RamseyResult:
    all_colorings_contain: bool
    counterexample: object  # ColoredHypergraph or None


def _ramsey_graph_two_colors(l, n, sets):
    """Vectorized sweep over all 2-colorings of the edges of K_n with the
    first edge's color fixed (color swap maps any counterexample to one of
    this form, so the sweep is exhaustive up to renaming).  Colorings are
    integers whose bit for subset index i sits at position C-1-i, making
    ascending integers the ascending lexicographic color strings."""
    c = len(sets)
    index = {s: i for i, s in enumerate(sets)}
    codes = np.arange(1 << (c - 1), dtype=np.uint64)
    has_mono = np.zeros(codes.shape[0], dtype=bool)
    for group in itertools.combinations(range(n), l):
        edges = [index[p] for p in itertools.combinations(group, 2)]
        first = np.uint64(c - 1 - edges[0])
        same = np.ones(codes.shape[0], dtype=bool)
        for e in edges[1:]:
            shift = np.uint64(c - 1 - e)
            same &= ((codes >> first) ^ (codes >> shift)) & np.uint64(1) == 0
        has_mono |= same
    if has_mono.all():
        return None
    bad = int(codes[~has_mono][0])
    return np.array([(bad >> (c - 1 - i)) & 1 for i in range(c)], dtype=np.int64)


def ramsey_verify(k, l, r, n, enumeration_cap=1 << 22):
    """Exhaustively checks whether every r-coloring of the k-subsets of
    range(n) contains a monochromatic l-subset; reports the lexicographically
    smallest counterexample coloring otherwise.

    The first subset's color is pinned to 0: relabeling colors by first
    occurrence maps any counterexample to one of that form without changing
    monochromatic sets, and the lexicographically smallest counterexample is
    already of that form."""
    if k < 1 or l < k or r < 1 or n < 1:
        raise ValueError("need k >= 1, l >= k, r >= 1, n >= 1")
    sets = list(itertools.combinations(range(n), k))
    c = len(sets)
    if l > n:
        return RamseyResult(False, ColoredHypergraph(n, k, r, np.zeros(c, dtype=np.int64)))
    if c >= 1 and r ** (c - 1) > enumeration_cap:
        raise ValueError(
            f"{r}^{c - 1} pruned colorings exceed the enumeration cap {enumeration_cap}")

    if r == 1:
        h = ColoredHypergraph(n, k, r, np.zeros(c, dtype=np.int64))
        found = find_monochromatic(h, l)
        return RamseyResult(found is not None, None if found is not None else h)

    if k == 2 and r == 2:
        bad = _ramsey_graph_two_colors(l, n, sets)
        if bad is None:
            return RamseyResult(True, None)
        return RamseyResult(False, ColoredHypergraph(n, k, r, bad))

    for tail in itertools.product(range(r), repeat=c - 1):
        h = ColoredHypergraph(n, k, r, np.array((0,) + tail, dtype=np.int64))
        if find_monochromatic(h, l) is None:
            return RamseyResult(False, h)
    return RamseyResult(True, None)
