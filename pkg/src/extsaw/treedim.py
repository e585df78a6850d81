"""Growth, branching-number brackets and percolation on truncated trees.

The branching number is approached through the depth-D flow threshold: the
largest lambda for which one unit can flow from the root to level D when
the edge into a node at level n has capacity lambda**-(n - offset). Cutting
the tree at level n shows the threshold never exceeds |W_n|**(1/(n-offset)),
and deeper truncations can only lower it.

Floating point: capacities are doubles (fine for depth <= 40 at the lambdas
seen here) and feasibility is tested with 1e-12 slack. Every accepted flow
is re-checked for conservation and capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sawtree import TruncatedTree

EPS = 1e-12


@dataclass
class GrowthEstimate:
    roots: dict  # n -> |W_n|^(1/n)
    lower: float
    upper: float
    window: tuple

    def as_dict(self) -> dict:
        return {"roots": {str(k): v for k, v in self.roots.items()}, "lower": self.lower,
                "upper": self.upper, "window": list(self.window)}


def growth_estimates(t: TruncatedTree, n0: int = 1) -> GrowthEstimate:
    """|W_n|^(1/n) for n0 <= n <= D, with their min and max."""
    if not 1 <= n0 <= t.depth:
        raise ValueError("need 1 <= n0 <= depth")
    sizes = t.level_sizes
    roots = {n: float(int(sizes[n])) ** (1.0 / n) for n in range(n0, t.depth + 1)}
    vals = list(roots.values())
    return GrowthEstimate(roots, min(vals), max(vals), (n0, t.depth))


# -- flows ------------------------------------------------------------------

@dataclass
class FlowCertificate:
    lam: float
    value: float  # max flow root -> level D
    flow: np.ndarray  # flow on the edge into each node, scaled to total 1

    def verify(self, t: TruncatedTree) -> bool:
        """Conservation at every internal node and capacity on every edge."""
        f = self.flow
        if abs(f[0] - 1.0) > 1e-9:
            return False
        out = np.bincount(t.parent[1:], weights=f[1:], minlength=len(t))
        inner = t.level < t.depth
        if np.any(np.abs(out[inner] - f[inner]) > 1e-9):
            return False
        cap = _capacities(t, self.lam)
        return bool(np.all(f[1:] <= cap[1:] * (1 + 1e-9) + EPS) and np.all(f >= -EPS))


def _capacities(t: TruncatedTree, lam: float) -> np.ndarray:
    expo = (t.level - t.level_offset).astype(float)
    cap = np.power(float(lam), -expo)
    cap[0] = np.inf
    return cap


def _levels(t: TruncatedTree):
    order = np.argsort(t.level, kind="stable")
    bounds = np.searchsorted(t.level[order], np.arange(t.depth + 2))
    return [order[bounds[n] : bounds[n + 1]] for n in range(t.depth + 1)]


def max_flow_value(t: TruncatedTree, lam: float, levels=None):
    """Max flow to level D and the bottom-up capped values per node."""
    cap = _capacities(t, lam)
    val = np.zeros(len(t))
    levels = levels if levels is not None else _levels(t)
    if t.depth == 0:
        return 1.0, np.ones(1)
    bottom = levels[t.depth]
    val[bottom] = cap[bottom]
    for n in range(t.depth - 1, -1, -1):
        below = levels[n + 1]
        sums = np.bincount(t.parent[below], weights=val[below], minlength=len(t))
        nodes = levels[n]
        val[nodes] = np.minimum(cap[nodes], sums[nodes])
    return float(val[0]), val


def _route(t: TruncatedTree, val: np.ndarray, levels) -> np.ndarray:
    """Push one unit down, splitting in proportion to the capped values."""
    flow = np.zeros(len(t))
    flow[0] = 1.0
    for n in range(1, t.depth + 1):
        nodes = levels[n]
        par = t.parent[nodes]
        tot = np.bincount(par, weights=val[nodes], minlength=len(t))[par]
        share = np.divide(val[nodes], tot, out=np.zeros(len(nodes)), where=tot > 0)
        flow[nodes] = flow[par] * share
    return flow


def branching_lower_flow(t: TruncatedTree, lam: float, levels=None):
    """(feasible, certificate): can a unit flow reach level D under
    capacities lam**-(|e| - offset)? The certificate is None when not."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    levels = levels if levels is not None else _levels(t)
    value, val = max_flow_value(t, lam, levels)
    if value < 1.0 - EPS:
        return False, None
    if t.depth == 0:
        return True, FlowCertificate(lam, value, np.ones(1))
    cert = FlowCertificate(lam, value, _route(t, val, levels))
    if not cert.verify(t):
        raise RuntimeError("flow certificate failed verification")
    return True, cert


@dataclass
class BranchingBound:
    lam_lo: float | None
    lam_hi: float | None
    depth: int
    certificate: FlowCertificate | None = field(repr=False, default=None)

    @property
    def threshold(self) -> float | None:
        if self.lam_lo is None:
            return None
        return 0.5 * (self.lam_lo + self.lam_hi)

    def as_dict(self) -> dict:
        return {"threshold_lo": self.lam_lo, "threshold_hi": self.lam_hi, "depth": self.depth}


def branching_estimate(t: TruncatedTree, tol: float = 1e-4) -> BranchingBound:
    """Bisect for the depth-D flow threshold to width <= tol.

    Degenerate trees get None bounds: depth 0 (every lambda works) or no
    node at level D (none does).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    levels = _levels(t)
    if t.depth <= t.level_offset or len(levels[t.depth]) == 0:
        return BranchingBound(None, None, t.depth)
    ok, cert = branching_lower_flow(t, 1.0, levels)
    if not ok:
        return BranchingBound(None, None, t.depth)
    # cutting just below the first capacity-limited level rules this out
    lo, hi = 1.0, float(t.level_sizes[1 + t.level_offset]) + 1.0
    assert not branching_lower_flow(t, hi, levels)[0]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        feasible, c = branching_lower_flow(t, mid, levels)
        if feasible:
            lo, cert = mid, c
        else:
            hi = mid
    return BranchingBound(lo, hi, t.depth, cert)


# -- level cuts and the growth gap ------------------------------------------

@dataclass
class LevelCutReport:
    lam: float | None
    rows: list  # (n, |W_n|, |W_n|^(1/(n-offset)), holds)
    holds: bool


def check_br_le_gr(t: TruncatedTree, bound: BranchingBound | None = None) -> LevelCutReport:
    """For the certified lambda, each level cut must carry the unit flow:
    |W_n| lambda**-(n-offset) >= 1, i.e. lambda <= |W_n|**(1/(n-offset))."""
    bound = bound or branching_estimate(t)
    lam = bound.lam_lo
    rows = []
    holds = True
    for n in range(t.level_offset + 1, t.depth + 1):
        w = int(t.level_sizes[n])
        root = w ** (1.0 / (n - t.level_offset)) if w else 0.0
        ok = lam is None or w * lam ** (-(n - t.level_offset)) >= 1.0 - 1e-9
        holds &= ok
        rows.append((n, w, root, ok))
    return LevelCutReport(lam, rows, holds)


def furstenberg_gap(t: TruncatedTree, bound: BranchingBound | None = None) -> dict:
    """|threshold_D - |W_D|^(1/D)| with the numbers that went into it."""
    bound = bound or branching_estimate(t)
    gr = float(int(t.level_sizes[t.depth])) ** (1.0 / (t.depth - t.level_offset))
    return {"depth": t.depth, "threshold_lo": bound.lam_lo, "threshold_hi": bound.lam_hi,
            "growth_D": gr, "gap": abs(bound.threshold - gr)}


# -- percolation ------------------------------------------------------------

@dataclass
class PercolationEstimate:
    pc: float | None
    ci: tuple
    grid: list
    survival: list
    seed: int
    trials: int
    depth: int

    def as_dict(self) -> dict:
        return {"pc_estimate": self.pc, "ci": list(self.ci), "seed": self.seed,
                "trials": self.trials, "depth": self.depth,
                "grid": self.grid, "survival": self.survival}


def _critical_values(t: TruncatedTree, u: np.ndarray, levels) -> np.ndarray:
    """Per trial, the least p at which the root reaches level D: the
    min over root-to-level-D paths of the max uniform label on the path."""
    k = u.shape[0]
    c = np.full((k, len(t)), np.inf)
    bottom = levels[t.depth]
    c[:, bottom] = u[:, bottom]
    for n in range(t.depth - 1, -1, -1):
        below = levels[n + 1]
        if len(below) == 0:
            continue
        par = t.parent[below]
        order = np.argsort(par, kind="stable")
        below, par = below[order], par[order]
        starts = np.flatnonzero(np.r_[True, par[1:] != par[:-1]])
        best = np.minimum.reduceat(c[:, below], starts, axis=1)
        heads = par[starts]
        if n == 0:
            c[:, heads] = best
        else:
            c[:, heads] = np.maximum(u[:, heads], best)
    return c[:, 0]


def _crossing(grid: np.ndarray, surv: np.ndarray) -> float | None:
    above = np.flatnonzero(surv >= 0.5)
    if len(above) == 0:
        return None
    j = above[0]
    if j == 0:
        return float(grid[0])
    x0, x1, y0, y1 = grid[j - 1], grid[j], surv[j - 1], surv[j]
    return float(x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0))


def percolation_pc_estimate(t: TruncatedTree, trials: int = 2000, seed: int = 0,
                            step: float = 0.02, bootstrap: int = 200) -> PercolationEstimate:
    """Monte Carlo bond percolation on the truncated tree.

    Trial i draws one uniform per edge from numpy's PCG64 generator seeded
    with (seed, i); an edge is open at p when its uniform is below p, so all
    grid points share the same samples. The estimate is where the survival
    frequency crosses 1/2 (linear interpolation); the interval is a
    percentile bootstrap over trials.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    levels = _levels(t)
    crit = np.empty(trials)
    if t.depth == 0:
        crit[:] = -np.inf  # nothing to cross: the root alone always survives
        trials_done = True
    else:
        trials_done = False
    chunk = max(1, min(trials, 2_000_000 // max(len(t), 1)))
    for a in range(0 if not trials_done else trials, trials, chunk):
        b = min(trials, a + chunk)
        u = np.stack([np.random.default_rng([seed, i]).random(len(t)) for i in range(a, b)])
        crit[a:b] = _critical_values(t, u, levels)
    grid = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
    srt = np.sort(crit)

    def surv_of(sorted_crit):
        return np.searchsorted(sorted_crit, grid, side="left") / len(sorted_crit)

    surv = surv_of(srt)
    # p = 1 opens everything (uniforms are < 1); p = 0 opens nothing
    pc = _crossing(grid, surv)
    rng = np.random.default_rng([seed, trials, 1])
    boots = []
    for _ in range(bootstrap):
        sample = np.sort(crit[rng.integers(0, trials, trials)])
        x = _crossing(grid, surv_of(sample))
        if x is not None:
            boots.append(x)
    ci = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))) if boots else (math.nan, math.nan)
    return PercolationEstimate(pc, ci, grid.tolist(), surv.tolist(), seed, trials, t.depth)
