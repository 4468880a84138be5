"""Diffusion models (DIC, DLT, CIC), cascade simulation and live-edge worlds.

Every influence function in this package is one :class:`DiffusionScenario`.
Spread is measured in nodes, with unit node weights.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .graph import Graph, merge_parallel_edges

MODELS = ("DIC", "CIC", "DLT")
DELAY_FAMILIES = ("exponential", "rayleigh")

_WEIGHT_TOL = 1e-9


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class DiffusionScenario:
    """One influence function: a model class plus per-edge parameters.

    For DIC the edge parameter is an activation probability, for DLT a
    threshold weight. For CIC it is the delay parameter: the rate of an
    exponential delay, or the scale ``sigma`` of a Rayleigh delay with
    density ``(t / sigma**2) * exp(-t**2 / (2 * sigma**2))``. Nodes count as
    active under CIC if reached within ``window``.

    DIC and DLT graphs have parallel edges merged on construction. CIC keeps
    parallel edges; the earliest of their delays wins, which is exactly what
    an edge with the combined parameter would produce.
    """

    model: str
    graph: Graph
    window: Optional[float] = None
    delay_family: str = "exponential"
    name: str = ""

    def __post_init__(self):
        model = self.model.upper()
        if model not in MODELS:
            raise ScenarioError(f"unknown diffusion model {self.model!r}")
        object.__setattr__(self, "model", model)
        g = self.graph
        if model == "DIC":
            if g.m and g.param.max() > 1.0:
                raise ScenarioError("DIC activation probabilities must lie in [0, 1]")
            g = merge_parallel_edges(g, "or-probability")
        elif model == "DLT":
            g = merge_parallel_edges(g, "sum-weight-capped", scale=1.0) if g.has_parallel_edges() else g
            if g.m and g.in_weight().max() > 1.0 + _WEIGHT_TOL:
                raise ScenarioError("DLT incoming weights must sum to at most 1 at every node")
        else:
            if self.window is None or not self.window > 0:
                raise ScenarioError("CIC scenarios need a positive observation window")
            if self.delay_family not in DELAY_FAMILIES:
                raise ScenarioError(f"unknown delay family {self.delay_family!r}")
            if g.m and g.param.min() <= 0:
                raise ScenarioError("CIC delay parameters must be positive")
        object.__setattr__(self, "graph", g)

    @property
    def n(self) -> int:
        return self.graph.n

    def describe(self) -> dict:
        d = {"model": self.model, "name": self.name}
        if self.model == "CIC":
            d.update(window=self.window, delay_family=self.delay_family)
        return d


@dataclass(frozen=True)
class Realization:
    """A deterministic world drawn from a scenario.

    ``live`` is a boolean edge mask (DIC/DLT); ``delays`` holds one sampled
    transmission delay per edge (CIC).
    """

    scenario: DiffusionScenario
    live: Optional[np.ndarray] = None
    delays: Optional[np.ndarray] = None

    def live_edges(self) -> np.ndarray:
        """Edge indices usable in this world (delay within the window for CIC)."""
        if self.live is not None:
            return np.flatnonzero(self.live)
        return np.flatnonzero(self.delays <= self.scenario.window)

    def spread(self, seeds: Iterable[int]) -> int:
        seeds = _check_seeds(self.scenario.n, seeds)
        g = self.scenario.graph
        if self.live is not None:
            return len(_reach(g, seeds, self.live))
        dist = _delay_distances(g, seeds, self.delays, self.scenario.window)
        return len(dist)


def _check_seeds(n: int, seeds: Iterable[int]) -> list:
    seeds = sorted({int(s) for s in seeds})
    if seeds and (seeds[0] < 0 or seeds[-1] >= n):
        raise ScenarioError(f"seed node outside [0, {n})")
    return seeds


def draw_delays(family: str, params: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Exponential delays take ``params`` as rates, Rayleigh delays as scales."""
    if family == "exponential":
        return rng.exponential(1.0 / params)
    return rng.rayleigh(params)


def sample_dlt_live(scenario: DiffusionScenario, rng: np.random.Generator) -> np.ndarray:
    """Each node keeps incoming edge ``e`` with probability ``w_e`` and none
    with the leftover probability ``1 - sum(w)``."""
    g = scenario.graph
    live = np.zeros(g.m, dtype=bool)
    if g.m == 0:
        return live
    order = np.lexsort((np.arange(g.m), g.dst))
    dst_sorted = g.dst[order]
    cum = np.cumsum(g.param[order])
    starts = np.searchsorted(dst_sorted, np.arange(g.n))
    base = np.where(starts > 0, cum[np.maximum(starts - 1, 0)], 0.0)
    # running weight within each destination group
    within = cum - base[dst_sorted]
    u = rng.random(g.n)[dst_sorted]
    prev = within - g.param[order]
    pick = (u >= prev) & (u < within)
    live[order[pick]] = True
    return live


def sample_realization(scenario: DiffusionScenario, rng: np.random.Generator) -> Realization:
    g = scenario.graph
    if scenario.model == "DIC":
        return Realization(scenario, live=rng.random(g.m) < g.param)
    if scenario.model == "DLT":
        return Realization(scenario, live=sample_dlt_live(scenario, rng))
    return Realization(scenario, delays=draw_delays(scenario.delay_family, g.param, rng))


def _reach(g: Graph, seeds: list, live: np.ndarray) -> set:
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        u = stack.pop()
        for e in g.out_edges(u):
            if live[e]:
                v = int(g.dst[e])
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
    return seen


def _delay_distances(g: Graph, seeds: list, delays: np.ndarray, window: float) -> dict:
    dist = {}
    heap = [(0.0, s) for s in seeds]
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if u in dist:
            continue
        dist[u] = d
        for e in g.out_edges(u):
            v = int(g.dst[e])
            nd = d + delays[e]
            if nd <= window and v not in dist:
                heapq.heappush(heap, (nd, v))
    return dist


def simulate_cascade(scenario: DiffusionScenario, seeds: Iterable[int],
                     rng: np.random.Generator) -> set:
    """Run one cascade forward in time and return the final active set.

    This is the direct process simulation (coin flips as activations happen,
    thresholds drawn per node, delays drawn as nodes fire). It deliberately
    does not go through :func:`sample_realization`.
    """
    seeds = _check_seeds(scenario.n, seeds)
    if not seeds:
        return set()
    g = scenario.graph
    if scenario.model == "DIC":
        active = set(seeds)
        frontier = list(seeds)
        while frontier:
            nxt = []
            for u in frontier:
                for e in g.out_edges(u):
                    v = int(g.dst[e])
                    if v not in active and rng.random() < g.param[e]:
                        active.add(v)
                        nxt.append(v)
            frontier = nxt
        return active
    if scenario.model == "DLT":
        thresholds = rng.random(g.n)
        active = set(seeds)
        incoming = np.zeros(g.n)
        frontier = list(seeds)
        while frontier:
            nxt = []
            for u in frontier:
                for e in g.out_edges(u):
                    v = int(g.dst[e])
                    if v in active:
                        continue
                    incoming[v] += g.param[e]
                    if incoming[v] >= thresholds[v]:
                        active.add(v)
                        nxt.append(v)
            frontier = nxt
        return active
    # CIC: a node fires at its activation time and draws delays to its out-neighbours then
    times = {}
    heap = [(0.0, s) for s in seeds]
    heapq.heapify(heap)
    window = scenario.window
    while heap:
        t, u = heapq.heappop(heap)
        if u in times:
            continue
        times[u] = t
        edges = g.out_edges(u)
        if edges.size == 0:
            continue
        delays = draw_delays(scenario.delay_family, g.param[edges], rng)
        for e, dl in zip(edges.tolist(), delays.tolist()):
            v = int(g.dst[e])
            if v not in times and t + dl <= window:
                heapq.heappush(heap, (t + dl, v))
    return set(times)

