"""Perturbation-interval model: edge probabilities known only up to an interval.

Includes exact world enumeration for small DIC graphs, used to check that the
worst case of a seed set's ratio sits at an interval endpoint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .diffusion import DiffusionScenario
from .graph import Graph

ENUM_MAX_NODES = 10
ENUM_MAX_EDGES = 20


class PerturbationError(ValueError):
    pass


@dataclass(frozen=True)
class IntervalModel:
    """Per-edge intervals ``[lower_e, upper_e]`` over a base DIC graph."""

    graph: Graph
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (self.graph.m,) or hi.shape != (self.graph.m,):
            raise PerturbationError("one interval per edge is required")
        if np.any(lo < 0) or np.any(hi > 1) or np.any(lo > hi):
            raise PerturbationError("intervals must satisfy 0 <= lower <= upper <= 1")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def relative(cls, graph: Graph, q: float) -> "IntervalModel":
        """``[(1 - q) p_e, min(1, (1 + q) p_e)]`` around the graph's parameters."""
        if not 0.0 <= q <= 1.0:
            raise PerturbationError("q must lie in [0, 1]")
        p = graph.param
        return cls(graph, (1.0 - q) * p, np.minimum(1.0, (1.0 + q) * p))

    def scenario(self, params, name: str = "") -> DiffusionScenario:
        return DiffusionScenario("DIC", self.graph.with_params(params), name=name)


def endpoint_sample(model: IntervalModel, count: int, rng: np.random.Generator) -> list:
    """``count`` scenarios with each edge independently at its lower or upper
    endpoint (probability 1/2 each), then the all-lower and all-upper ones."""
    if count < 0:
        raise PerturbationError("count must be >= 0")
    out = []
    for i in range(count):
        pick_upper = rng.random(model.graph.m) < 0.5
        out.append(model.scenario(np.where(pick_upper, model.upper, model.lower),
                                  name=f"endpoint-{i}"))
    out.append(model.scenario(model.lower, name="all-lower"))
    out.append(model.scenario(model.upper, name="all-upper"))
    return out


class WorldTable:
    """All ``2^m`` live-edge worlds of a small graph with per-node reach bitmasks.

    World reachability does not depend on the probabilities, so one table
    serves every parameter setting; :meth:`spread` only reweights worlds.
    """

    def __init__(self, graph: Graph):
        if graph.n > ENUM_MAX_NODES or graph.m > ENUM_MAX_EDGES:
            raise PerturbationError(
                f"world enumeration limited to n<={ENUM_MAX_NODES}, m<={ENUM_MAX_EDGES}")
        self.graph = graph
        n, m = graph.n, graph.m
        self.masks = np.arange(2 ** m, dtype=np.int64)
        reach = np.zeros((2 ** m, n), dtype=np.int64)
        src, dst = graph.src.tolist(), graph.dst.tolist()
        for w in range(2 ** m):
            adj = [[] for _ in range(n)]
            for e in range(m):
                if w >> e & 1:
                    adj[src[e]].append(dst[e])
            for v in range(n):
                seen = 1 << v
                stack = [v]
                while stack:
                    u = stack.pop()
                    for x in adj[u]:
                        if not seen >> x & 1:
                            seen |= 1 << x
                            stack.append(x)
                reach[w, v] = seen
        self.reach = reach

    def world_probabilities(self, params) -> np.ndarray:
        p = np.asarray(params, dtype=float)
        bits = (self.masks[:, None] >> np.arange(self.graph.m)) & 1
        return np.prod(np.where(bits == 1, p, 1.0 - p), axis=1)

    def spread(self, seeds: Iterable[int], params) -> float:
        """Exact expected number of nodes reached from ``seeds``."""
        seeds = list(seeds)
        if not seeds:
            return 0.0
        union = np.zeros(self.reach.shape[0], dtype=np.int64)
        for s in seeds:
            union |= self.reach[:, s]
        sizes = np.array([int(x).bit_count() for x in union.tolist()])
        return float(self.world_probabilities(params) @ sizes)

    def best(self, size: int, params) -> float:
        """Exact optimum spread over seed sets of ``size`` nodes."""
        return max(self.spread(c, params)
                   for c in itertools.combinations(range(self.graph.n), size))


def grid_worst_case(base: Graph, seeds: Sequence[int], free_edge: int, interval: tuple,
                    grid_points: int = 11, table: Optional[WorldTable] = None):
    """Minimize ``spread(seeds) / best spread`` over one edge's probability.

    All other edges keep their ``base`` parameters; ``free_edge`` sweeps an
    even grid over ``interval``. Both spreads are exact. Returns
    ``(argmin value, min ratio, grid, ratios)``. Values within ``1e-12`` of
    the minimum count as ties, and ties go to an interval endpoint first.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not 0.0 <= lo <= hi <= 1.0:
        raise PerturbationError("interval must satisfy 0 <= lo <= hi <= 1")
    if grid_points < 3:
        raise PerturbationError("grid_points must be >= 3")
    if not 0 <= free_edge < base.m:
        raise PerturbationError("free_edge out of range")
    table = table or WorldTable(base)
    seeds = list(seeds)
    if lo == hi:
        grid = np.array([lo])
    else:
        grid = np.linspace(lo, hi, grid_points)
    ratios = []
    for x in grid:
        params = base.param.copy()
        params[free_edge] = x
        best = table.best(len(seeds), params)
        ratios.append(table.spread(seeds, params) / best if best > 0 else 1.0)
    ratios = np.asarray(ratios)
    low = ratios.min()
    tied = np.flatnonzero(ratios <= low + 1e-12)
    ends = [i for i in (0, len(grid) - 1) if i in tied]
    idx = ends[0] if ends else int(tied[0])
    return float(grid[idx]), float(ratios[idx]), grid, ratios
