"""Convergence-in-measure metric on step functions, anchored 1-Lipschitz
function families, Hausdorff distance between families, and an upper
estimator of the observable distance between finite mm-spaces.

The estimator compares finite families: anchored extreme functions of each
space (distance functions to small point sets, shifted to vanish at the
anchor) together with all constant functions.  Constants are shared by both
sides, so they never contribute to the Hausdorff value themselves; they let a
concentrated distance function sit close to its typical value, which is what
makes a Levy sequence's distance to the one-point space decay.  Without them
every family containing d(., x0) would stay about 1/2 away from {0} no
matter how concentrated the space is.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .concentration import SearchConfig
from .spaces import _MATERIALIZE_CAP, point_space

_SUPPORT_TOL = 1e-15
_CELL_SQ_CAP = 64  # below this many cells the constant search broadcasts O(c^2)


# -- step functions and the me1 metric ---------------------------------------

@dataclass
class StepFunction:
    """Piecewise-constant function on [0,1]: values[i] on
    [breakpoints[i], breakpoints[i+1])."""
    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        b = self.breakpoints
        if b.shape[0] < 2 or b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError("breakpoints must run from 0 to 1")
        if not (np.diff(b) > 0).all():
            raise ValueError("breakpoints must be strictly ascending")
        if self.values.shape[0] != b.shape[0] - 1:
            raise ValueError("need one value per interval")

    def masses(self):
        return np.diff(self.breakpoints)


def step_constant(c):
    return StepFunction([0.0, 1.0], [float(c)])


def step_from_cells(masses, values):
    """Step function from cell masses (zero-mass cells dropped)."""
    masses = np.asarray(masses, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = masses > _SUPPORT_TOL
    masses, values = masses[keep], values[keep]
    total = masses.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"cell masses sum to {total!r}, expected 1")
    breaks = np.concatenate([[0.0], np.cumsum(masses)])
    breaks[-1] = 1.0
    return StepFunction(breaks, values)


def _me1_rows(masses, gaps):
    """me1-to-zero of |gap| rows sharing one cell-mass vector.

    For each row: inf{lam > 0 : mass{gaps > lam} < lam}.  The tail-mass
    function is constant between distinct gap values, so the infimum is
    attained as max(window start, window tail) over the finitely many
    windows, evaluated here for all rows at once.
    """
    gaps = np.abs(np.asarray(gaps, dtype=float))
    if gaps.ndim == 1:
        gaps = gaps[None, :]
    order = np.argsort(gaps, axis=1, kind="stable")
    g = np.take_along_axis(gaps, order, axis=1)
    m = np.asarray(masses, dtype=float)[order]
    total = m.sum(axis=1, keepdims=True)
    cum = np.cumsum(m, axis=1)

    k, c = g.shape
    nxt = np.concatenate([g[:, 1:], np.full((k, 1), np.inf)], axis=1)
    is_end = nxt > g  # last position of each run of equal gap values
    tail = total - cum  # mass strictly above g[:, j] at run ends
    cand = np.where(is_end & (tail < nxt), np.maximum(g, tail), np.inf)

    # window [0, smallest positive gap): tail is the whole positive-gap mass
    tail0 = (m * (g > 0)).sum(axis=1)
    next0 = np.where(g > 0, g, np.inf).min(axis=1)
    cand0 = np.where(tail0 < next0, tail0, np.inf)

    return np.minimum(cand.min(axis=1), cand0)


def _refine_pair(h1, h2):
    """Common-partition cell masses and value rows for two step functions."""
    edges = np.union1d(h1.breakpoints, h2.breakpoints)
    masses = np.diff(edges)
    left = edges[:-1]
    v1 = h1.values[np.searchsorted(h1.breakpoints, left, side="right") - 1]
    v2 = h2.values[np.searchsorted(h2.breakpoints, left, side="right") - 1]
    return masses, v1, v2


def me1(h1, h2):
    """Ky-Fan style metric of convergence in measure:
    inf{lam > 0 : Leb{|h1 - h2| > lam} < lam}, computed exactly."""
    masses, v1, v2 = _refine_pair(h1, h2)
    return float(_me1_rows(masses, (v1 - v2)[None, :])[0])


def _best_const_rows(masses, vals, iters=80):
    """min over constants c of me1(row - c), one value per row, by bisection.

    Feasibility of lam: some closed window of width 2*lam captures value mass
    greater than 1 - lam.  Captured mass is nondecreasing in lam and the
    target decreasing, so the crossover is unique and bisection converges to
    the infimum to full double precision.
    """
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        vals = vals[None, :]
    order = np.argsort(vals, axis=1, kind="stable")
    v = np.take_along_axis(vals, order, axis=1)
    m = np.asarray(masses, dtype=float)[order]
    k, c = v.shape
    cum = np.concatenate([np.zeros((k, 1)), np.cumsum(m, axis=1)], axis=1)
    total = cum[:, -1]

    lo = np.zeros(k)
    hi = np.ones(k)
    small = c <= _CELL_SQ_CAP
    rows = np.arange(k)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if small:
            within = v[:, None, :] <= (v + 2.0 * mid[:, None])[:, :, None]
            j = within.sum(axis=2)
        else:
            j = np.empty((k, c), dtype=np.intp)
            for r in rows:
                j[r] = np.searchsorted(v[r], v[r] + 2.0 * mid[r], side="right")
        captured = (np.take_along_axis(cum, j, axis=1) - cum[:, :-1]).max(axis=1)
        feasible = captured > total - mid
        hi = np.where(feasible, mid, hi)
        lo = np.where(feasible, lo, mid)
    return hi


def best_constant_me1(h):
    """Distance from a step function to the nearest constant function."""
    return float(_best_const_rows(h.masses(), h.values[None, :])[0])


# -- anchored Lipschitz families ----------------------------------------------

def lipschitz_extremes(space, anchor, pair_limit=12, mcshane_cap=256):
    """Finite spanning family of 1-Lipschitz value vectors vanishing at anchor.

    Members are x -> d(x, S) - d(anchor, S) for S in a subset pool (all
    singletons; all pairs when the space has at most pair_limit points), their
    negatives, and the zero vector.  Distance functions to sets are exactly
    1-Lipschitz; on small spaces each member is additionally passed through
    the McShane cap min_y(v(y) + d(x, y)) to pin the property against float
    drift.  Exact duplicates are removed.
    """
    n = space.n
    if n > _MATERIALIZE_CAP:
        raise ValueError(
            f"space has {n} points, too many for extreme-family enumeration")
    if not 0 <= anchor < n:
        raise ValueError(f"anchor {anchor} out of range")
    d = space.dist

    cand = [np.zeros(n)]
    pools = [d[:, [y]].min(axis=1) for y in range(n)]
    if n <= pair_limit:
        pools += [d[:, [y, z]].min(axis=1)
                  for y in range(n) for z in range(y + 1, n)]
    for f in pools:
        v = f - f[anchor]
        cand.append(v)
        cand.append(-v)

    if n <= mcshane_cap:
        capped = []
        for v in cand:
            w = (v[:, None] + d).min(axis=0)
            capped.append(w - w[anchor])
        cand = capped

    seen = set()
    out = []
    for v in cand:
        key = v.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


@dataclass
class Parametrization:
    """Map from a cell partition of [0,1] onto a space's points.

    breaks are the cell boundaries; owner[i] is the point owning cell i.  The
    pushforward of Lebesgue measure must reproduce the space's weights.
    """
    space: object
    breaks: np.ndarray
    owner: np.ndarray

    def __post_init__(self):
        self.breaks = np.asarray(self.breaks, dtype=float).reshape(-1)
        self.owner = np.asarray(self.owner, dtype=np.intp).reshape(-1)
        if self.owner.shape[0] != self.breaks.shape[0] - 1:
            raise ValueError("need one owner per cell")
        push = np.zeros(self.space.n)
        np.add.at(push, self.owner, np.diff(self.breaks))
        if not np.allclose(push, self.space.weight, atol=1e-9):
            raise ValueError("pushforward of cell lengths does not match weights")

    def to_step(self, values):
        """Lift a value vector over points to a step function on [0,1]."""
        values = np.asarray(values, dtype=float)
        return StepFunction(self.breaks, values[self.owner])


@dataclass
class LipschitzSet:
    """Finite family of step functions standing in for an L_f set."""
    members: list

    def __post_init__(self):
        if not self.members:
            raise ValueError("empty set has no Hausdorff distance")


def hausdorff_me1(A, B):
    """max of the two sup-min me1 deviations between finite families."""
    a_members = A.members if isinstance(A, LipschitzSet) else list(A)
    b_members = B.members if isinstance(B, LipschitzSet) else list(B)
    if not a_members or not b_members:
        raise ValueError("empty set has no Hausdorff distance")
    d = np.array([[me1(a, b) for b in b_members] for a in a_members])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


# -- observable distance estimator --------------------------------------------

@dataclass(frozen=True)
class ObsDistanceResult:
    upper: float
    parametrization_x: Parametrization
    parametrization_y: Parametrization
    coupling: np.ndarray
    anchor: tuple


@dataclass(frozen=True)
class LevyConvergenceResult:
    dists: np.ndarray
    decreasing_trend: bool
    slack: float


def _nw_corner(wx, wy, order_x, order_y):
    """Greedy coupling filling cells along the two point orders."""
    pi = np.zeros((wx.shape[0], wy.shape[0]))
    rx = wx[order_x].astype(float).copy()
    ry = wy[order_y].astype(float).copy()
    i = j = 0
    while i < rx.shape[0] and j < ry.shape[0]:
        step = min(rx[i], ry[j])
        if step > 0:
            pi[order_x[i], order_y[j]] += step
        rx[i] -= step
        ry[j] -= step
        if rx[i] <= _SUPPORT_TOL:
            i += 1
        if ry[j] <= _SUPPORT_TOL:
            j += 1
    s = pi.sum()
    if s > 0:
        pi /= s
    return pi


def _candidate_couplings(X, Y, cfg):
    nx, ny = X.n, Y.n
    out, seen = [], set()

    def push(pi):
        key = pi.round(15).tobytes()
        if key not in seen:
            seen.add(key)
            out.append(pi)

    if nx == ny and np.allclose(X.weight, Y.weight, atol=1e-12):
        push(np.diag(X.weight.astype(float)))
    push(np.outer(X.weight, Y.weight))
    ix, iy = np.arange(nx), np.arange(ny)
    push(_nw_corner(X.weight, Y.weight, ix, iy))
    push(_nw_corner(X.weight, Y.weight,
                    np.argsort(-X.weight, kind="stable"),
                    np.argsort(-Y.weight, kind="stable")))
    if math.factorial(nx) * math.factorial(ny) <= cfg.coupling_exhaustive_limit:
        for px in itertools.permutations(range(nx)):
            for py in itertools.permutations(range(ny)):
                push(_nw_corner(X.weight, Y.weight, np.array(px), np.array(py)))
    else:
        for r in range(cfg.restarts):
            rng = np.random.default_rng([cfg.seed, 100 + r])
            push(_nw_corner(X.weight, Y.weight,
                            rng.permutation(nx), rng.permutation(ny)))
    return out


def _family_hausdorff(masses, fam_a, fam_b):
    """Hausdorff me1 between two lifted families, each augmented with all
    constant functions.  Constants are shared, so each member only needs its
    best cross-family match and its best constant approximation."""
    A = np.stack(fam_a)
    B = np.stack(fam_b)

    def side(P, Q):
        best = np.full(P.shape[0], np.inf)
        block = max(1, (1 << 22) // max(1, P.shape[0] * masses.shape[0]))
        for q0 in range(0, Q.shape[0], block):
            qb = Q[q0:q0 + block]
            gaps = np.abs(P[:, None, :] - qb[None, :, :])
            vals = _me1_rows(masses, gaps.reshape(-1, masses.shape[0]))
            best = np.minimum(best, vals.reshape(P.shape[0], -1).min(axis=1))
        return best

    worst_a = np.minimum(side(A, B), _best_const_rows(masses, A))
    worst_b = np.minimum(side(B, A), _best_const_rows(masses, B))
    return float(max(worst_a.max(), worst_b.max()))


def obs_distance(X, Y, cfg=None):
    """Upper estimate of the observable distance between two finite spaces.

    Searches parametrization pairs induced by couplings of the weight vectors
    (several deterministic constructions, exhaustive order pairs on tiny
    instances, seeded restarts otherwise) and anchor cells up to the budget,
    evaluating the Hausdorff me1 distance between the constant-augmented
    extreme families on the common cell partition.  Enlarging the budget only
    adds candidates, so the reported value never increases with budget.
    """
    cfg = cfg or SearchConfig()
    best = None
    ext_cache_x, ext_cache_y = {}, {}

    for pi in _candidate_couplings(X, Y, cfg):
        ci, cj = np.nonzero(pi > _SUPPORT_TOL)
        masses = pi[ci, cj]
        by_mass = np.lexsort((cj, ci, -masses))
        for cell in by_mass[:max(1, cfg.anchor_budget)]:
            ia, ja = int(ci[cell]), int(cj[cell])
            if ia not in ext_cache_x:
                ext_cache_x[ia] = lipschitz_extremes(X, ia)
            if ja not in ext_cache_y:
                ext_cache_y[ja] = lipschitz_extremes(Y, ja)
            fam_a = [v[ci] for v in ext_cache_x[ia]]
            fam_b = [u[cj] for u in ext_cache_y[ja]]
            h = _family_hausdorff(masses, fam_a, fam_b)
            if best is None or h < best[0]:
                # anchor cell first so the anchor point owns the interval at 0
                order = np.concatenate([[cell], np.delete(np.arange(ci.shape[0]), cell)])
                best = (h, pi, ci[order], cj[order], masses[order], (ia, ja))
                if h <= 0.0:
                    break
        if best is not None and best[0] <= 0.0:
            break

    h, pi, oi, oj, masses, anchor = best
    breaks = np.concatenate([[0.0], np.cumsum(masses)])
    breaks[-1] = 1.0
    return ObsDistanceResult(
        upper=h,
        parametrization_x=Parametrization(X, breaks, oi),
        parametrization_y=Parametrization(Y, breaks, oj),
        coupling=pi,
        anchor=anchor)


def levy_convergence_test(spaces, cfg=None, slack=0.02):
    """Distances of an ordered space family to the one-point space.

    decreasing_trend applies the same slack rule as the concentration-curve
    trend check: consecutive increases stay within slack and the final value
    is strictly below the first.
    """
    pt = point_space()
    dists = np.array([obs_distance(s, pt, cfg).upper for s in spaces])
    trend = bool((np.diff(dists) <= slack).all() and dists[-1] < dists[0]) \
        if dists.shape[0] > 1 else False
    return LevyConvergenceResult(dists=dists, decreasing_trend=trend, slack=slack)
