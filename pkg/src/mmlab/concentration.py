"""Concentration estimators: search lower bounds, exact cube curves, medians
and tail checks, gaussian decay fits, and the analytic sphere cap value."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .spaces import (HALF_TOL, ConcentrationCurve, alpha_exact, measure,
                     neighborhood)

_MATERIALIZE_CAP = 8192


@dataclass(frozen=True)
class SearchConfig:
    """Budgets for the randomized searches.

    seed drives every random choice; restarts counts random restarts
    (sublevel seeds for the concentration search, coupling orderings for the
    observable-distance search); anchor_budget caps how many alignment
    anchors the observable search tries per coupling.
    """
    seed: int = 0
    restarts: int = 8
    ball_anchors: int = 4
    exhaustive_ball_limit: int = 64
    lipschitz_anchors: int = 3
    swap_passes: int = 2
    swap_cap: int = 256
    anchor_budget: int = 8
    coupling_exhaustive_limit: int = 720


@dataclass(frozen=True)
class GaussianFit:
    """Least-squares fit of alpha ~ c1 * exp(-c2 * n * eps^2), log domain."""
    c1: float
    c2: float
    residual: float


@dataclass
class LipschitzFunction:
    """Real function on the points of a space with a claimed Lipschitz constant."""
    values: np.ndarray
    constant: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.constant < 0:
            raise ValueError("Lipschitz constant must be nonnegative")

    def check(self, space, rel_tol=1e-9):
        """Raise if the claimed constant fails on some pair."""
        if self.values.shape[0] != space.n:
            raise ValueError("value vector length does not match the space")
        d = space.dist
        gaps = np.abs(self.values[:, None] - self.values[None, :])
        excess = gaps - self.constant * d * (1.0 + rel_tol) - 1e-12
        if (excess > 0).any():
            i, j = np.unravel_index(np.argmax(excess), excess.shape)
            raise ValueError(
                f"Lipschitz constant {self.constant} violated at ({i},{j}): "
                f"|f({i})-f({j})|={gaps[i, j]!r} > c*d={self.constant * d[i, j]!r}")


@dataclass(frozen=True)
class TailCheckResult:
    tail_mass: float
    bound: float
    holds: bool
    bound_kind: str  # "exact", "majority_ball", or "trivial"


@dataclass(frozen=True)
class LevyCheckResult:
    eps_grid: np.ndarray
    table: np.ndarray          # rows follow the input curve order
    is_levy_trend: bool
    threshold: float
    slack: float


# -- lower bound search ------------------------------------------------------

def _prefix_mask(weight, scores):
    """Smallest prefix of the score ordering whose mass reaches one half."""
    order = np.argsort(scores, kind="stable")
    cum = np.cumsum(weight[order])
    k = int(np.searchsorted(cum, 0.5 - HALF_TOL)) + 1
    mask = np.zeros(weight.shape[0], dtype=bool)
    mask[order[:k]] = True
    return mask


def _eval_candidate(space, mask, eps):
    return measure(space, neighborhood(space, mask, eps))


def _greedy_refine(space, mask, eps, cfg):
    """Local removals and swaps on a dense-matrix space.  Accepts strict
    lexicographic improvements in (thickened mass, set size), so it stops."""
    d = space.dist
    w = space.weight
    n = space.n
    need = 0.5 - HALF_TOL
    mask = mask.copy()

    def mu_eps(m):
        return float(w[(d[:, m].min(axis=1) <= eps)].sum())

    cur = mu_eps(mask)
    for _ in range(cfg.swap_passes):
        changed = False
        # removals first: shrinking the set never hurts the objective
        for i in np.flatnonzero(mask):
            if float(w[mask].sum()) - w[i] >= need:
                mask[i] = False
                trial = mu_eps(mask)
                if trial <= cur:
                    cur = trial
                    changed = True
                else:
                    mask[i] = True
        members = np.flatnonzero(mask)
        for i in members:
            if not mask[i]:
                continue
            # recompute after every accepted swap: a stale outside list can
            # offer a point already back in the set, and "adding" it would
            # silently drop the mass below one half
            outside = np.flatnonzero(~mask)
            if not outside.size:
                break
            mass_wo = float(w[mask].sum()) - w[i]
            feas = mass_wo + w[outside] >= need
            if not feas.any():
                continue
            mask[i] = False
            base = d[:, mask].min(axis=1) if mask.any() else np.full(n, np.inf)
            cand = outside[feas]
            reach = np.minimum(base[:, None], d[:, cand]) <= eps
            mus = w @ reach
            j = int(np.argmin(mus))
            if mus[j] < cur:
                mask[cand[j]] = True
                cur = float(mus[j])
                changed = True
            else:
                mask[i] = True
        if not changed:
            break
    return cur


def alpha_lower_bound(space, eps, cfg=None):
    """Search lower bound for the concentration function.

    Tries metric-ball seeds around anchor points and sublevel sets of randomly
    generated 1-Lipschitz functions, then greedy local swaps on small
    instances.  Every candidate set has mass at least one half, so one minus
    the best thickened mass can never exceed the exact value.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    cfg = cfg or SearchConfig()
    n = space.n
    w = space.weight
    all_idx = np.arange(n)

    if n <= cfg.exhaustive_ball_limit:
        anchors = list(range(n))
    else:
        rng = np.random.default_rng([cfg.seed, 0])
        anchors = sorted(rng.choice(n, size=min(cfg.ball_anchors, n), replace=False))

    best = 1.0
    best_mask = None
    for a in anchors:
        row = space.pairwise(np.array([a]), all_idx)[0]
        mask = _prefix_mask(w, row)
        mu = _eval_candidate(space, mask, eps)
        if mu < best:
            best, best_mask = mu, mask

    scale = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, 1 + r])
        picks = rng.choice(n, size=min(cfg.lipschitz_anchors, n), replace=False)
        rows = space.pairwise(np.asarray(picks), all_idx)
        if scale is None:
            scale = float(rows.max()) or 1.0
        offsets = rng.uniform(0.0, scale, size=picks.shape[0])
        f = (rows + offsets[:, None]).min(axis=0)
        mask = _prefix_mask(w, f)
        mu = _eval_candidate(space, mask, eps)
        if mu < best:
            best, best_mask = mu, mask

    if best_mask is not None and n <= cfg.swap_cap:
        best = min(best, _greedy_refine(space, best_mask, eps, cfg))

    return float(min(max(1.0 - best, 0.0), 0.5))


def majority_ball_upper(space, eps):
    """Cheap upper bound for the concentration function.

    If the ball around x of radius r has mass strictly above one half, every
    half-mass set meets it, so x lies in the eps-thickening whenever r <= eps.
    One minus the mass of such x bounds alpha from above.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = space.dist
    order = np.argsort(d, axis=1, kind="stable")
    cum = np.cumsum(np.take_along_axis(
        np.broadcast_to(space.weight, d.shape), order, axis=1), axis=1)
    first = np.argmax(cum > 0.5 + 1e-9, axis=1)
    radii = np.take_along_axis(d, np.take_along_axis(
        order, first[:, None], axis=1), axis=1)[:, 0]
    return float(min(max(1.0 - space.weight[radii <= eps].sum(), 0.0), 0.5))


# -- medians and tails -------------------------------------------------------

def median(space, f):
    """Smallest attained value with both sub- and super-level mass >= 1/2."""
    vals = np.asarray(f.values, dtype=float)
    if vals.shape[0] != space.n:
        raise ValueError("value vector length does not match the space")
    order = np.argsort(vals, kind="stable")
    v = vals[order]
    cw = np.cumsum(space.weight[order])
    uniq, first = np.unique(v, return_index=True)
    last = np.searchsorted(v, uniq, side="right") - 1
    le = cw[last]
    ge = 1.0 - np.where(first > 0, cw[first - 1], 0.0)
    ok = (le >= 0.5 - HALF_TOL) & (ge >= 0.5 - HALF_TOL)
    return float(uniq[int(np.argmax(ok))])


def tail_check(space, f, eps, exhaustive_cap=20, cfg=None):
    """Check the deviation-from-median tail against twice the concentration
    function.  Uses the exact alpha within the exhaustive range and the
    majority-ball upper bound beyond it (flagged in bound_kind)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    f.check(space)
    if f.constant > 1.0 + 1e-9:
        raise ValueError(
            f"tail bound needs a 1-Lipschitz function; constant is {f.constant}, "
            "rescale the values first")
    m = median(space, f)
    tail = float(space.weight[np.abs(f.values - m) > eps].sum())
    if space.n <= exhaustive_cap:
        bound = 2.0 * alpha_exact(space, eps, exhaustive_cap=exhaustive_cap)
        kind = "exact"
    elif space.n <= _MATERIALIZE_CAP:
        bound = 2.0 * majority_ball_upper(space, eps)
        kind = "majority_ball"
    else:
        bound = 1.0
        kind = "trivial"
    return TailCheckResult(tail_mass=tail, bound=bound,
                           holds=bool(tail <= bound + 1e-12), bound_kind=kind)


# -- decay fits --------------------------------------------------------------

def gaussian_fit(indexed_curves):
    """Fit log(alpha) = log(c1) - c2 * n * eps^2 over all positive curve values.

    indexed_curves is a list of (n, curve) pairs where n is the family index
    of each curve.  Zero alpha values are excluded.  Raises on fewer than two
    usable points or a degenerate design.
    """
    xs, ys = [], []
    for idx, curve in indexed_curves:
        keep = curve.alpha > 0
        xs.extend(float(idx) * curve.eps[keep] ** 2)
        ys.extend(np.log(curve.alpha[keep]))
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    if xs.size < 2 or np.ptp(xs) < 1e-15:
        raise ValueError("underdetermined fit: need two or more distinct design points")
    design = np.stack([np.ones_like(xs), -xs], axis=1)
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - ys) ** 2)))
    return GaussianFit(c1=float(np.exp(coef[0])), c2=float(coef[1]), residual=resid)


def levy_check(curves, threshold=0.05, slack=0.02):
    """Trend check across an ordered family of curves on a shared eps grid:
    at every eps the sequence must be non-increasing up to the slack and end
    below the threshold."""
    if not curves:
        raise ValueError("no curves")
    grid = curves[0].eps
    for c in curves[1:]:
        if c.eps.shape != grid.shape or not np.allclose(c.eps, grid, atol=1e-12):
            raise ValueError("curves do not share an eps grid")
    table = np.stack([c.alpha for c in curves])
    below = table[-1] < threshold
    mono = (np.diff(table, axis=0) <= slack).all(axis=0) if len(curves) > 1 \
        else np.ones_like(below)
    return LevyCheckResult(eps_grid=grid.copy(), table=table,
                           is_levy_trend=bool((below & mono).all()),
                           threshold=threshold, slack=slack)


# -- analytic sphere cap -----------------------------------------------------

def sphere_cap_alpha(dim, eps):
    """Concentration function of the round sphere S^dim with geodesic metric
    and rotation-invariant probability: the normalized mass of the polar cap
    beyond geodesic distance eps from a hemisphere."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps >= math.pi / 2:
        return 0.0

    def f(t):
        return math.sin(t) ** (dim - 1)

    num, err1 = quad(f, math.pi / 2 + eps, math.pi, epsabs=1e-12, epsrel=1e-12)
    den, err2 = quad(f, 0.0, math.pi, epsabs=1e-12, epsrel=1e-12)
    if max(err1, err2) > 1e-10:
        raise RuntimeError("quadrature failed to reach tolerance")
    return num / den


def sphere_cap_curve(dim, eps_grid):
    return ConcentrationCurve(eps_grid, [sphere_cap_alpha(dim, e) for e in eps_grid],
                              kind="analytic_cap")


# -- exact hamming cube curves -----------------------------------------------

def _cube_segment_order(n):
    """Vertex order whose initial segments minimize hop-neighborhood growth:
    sort by popcount, descending integer inside each layer (each partial layer
    is a star around the top coordinate).  Cross-checked against exhaustive
    search at small dims in the test suite."""
    idx = np.arange(1 << n, dtype=np.uint32)
    pc = np.bitwise_count(idx)
    return np.lexsort((-idx.astype(np.int64), pc))


def hamming_cube_alpha(n, eps, max_dim=24):
    """Exact concentration function of the normalized hamming cube.

    The optimal half-mass set is an initial segment of the isoperimetric
    vertex order, and its eps-thickening is floor(n*eps) hop expansions, so
    the value comes from growing that segment directly.  Works far beyond the
    generic enumeration cap because only one extremal set is ever built.
    """
    if not 1 <= n <= max_dim:
        raise ValueError(f"cube dimension {n} outside [1, {max_dim}]")
    if eps <= 0:
        raise ValueError("eps must be positive")
    t = int(np.floor(n * eps + 1e-9))
    count = 1 << n
    seg = np.zeros(count, dtype=bool)
    seg[_cube_segment_order(n)[:count // 2]] = True
    idx = np.arange(count)
    cur = seg
    for _ in range(min(t, n)):
        nxt = cur.copy()
        for b in range(n):
            nxt |= cur[idx ^ (1 << b)]
        cur = nxt
    return float(1.0 - cur.sum() / count)


def hamming_cube_curve(n, eps_grid):
    return ConcentrationCurve(eps_grid, [hamming_cube_alpha(n, e) for e in eps_grid],
                              kind="exact")


# -- curve assembly ----------------------------------------------------------

def concentration_curve(space, eps_grid, mode="exact", cfg=None, exhaustive_cap=20):
    """Sample the concentration function over a grid.

    mode "exact" enumerates subsets; mode "lower" runs the search bound and
    repairs monotonicity with a right-to-left running max, which keeps every
    value a valid lower bound.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if mode == "exact":
        vals = [alpha_exact(space, e, exhaustive_cap=exhaustive_cap) for e in eps_grid]
        return ConcentrationCurve(eps_grid, vals, kind="exact")
    if mode == "lower":
        vals = np.array([alpha_lower_bound(space, e, cfg=cfg) for e in eps_grid])
        vals = np.maximum.accumulate(vals[::-1])[::-1]
        return ConcentrationCurve(eps_grid, vals, kind="lower_bound_search")
    raise ValueError(f"unknown mode {mode!r}")
