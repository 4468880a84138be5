"""Pooled Monte-Carlo influence estimation and lazy greedy maximization.

A :class:`RealizationPool` fixes ``R`` sampled worlds of one scenario. All
``R`` worlds are laid side by side as one disjoint "super graph" on ``R * n``
nodes (world ``r`` owns ids ``r*n .. r*n + n - 1``), so the spread estimate of
a seed set is the number of super nodes it covers divided by ``R``. With the
pool fixed, every estimate is a coverage function: monotone and submodular
exactly, which is what lets CELF return precisely the naive greedy answer.

Spread is tracked as integer counts (summed over worlds) so that greedy ties
are compared exactly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels as _k
from .diffusion import DiffusionScenario, Realization, draw_delays, sample_dlt_live

DEFAULT_SAMPLES = 10_000
# memory cap for the per-component reachability bitsets of one world
BITSET_BYTES = 64 * 2**20


class EstimationError(ValueError):
    pass


class RealizationPool:
    """``R`` fixed worlds of one scenario plus reachability accelerators."""

    def __init__(self, scenario: DiffusionScenario, realizations: Sequence[Realization],
                 seed=None):
        if len(realizations) < 1:
            raise EstimationError("a pool needs at least one realization")
        self.scenario = scenario
        self.realizations = tuple(realizations)
        self.seed = seed
        self.R = len(self.realizations)
        self.n = scenario.n
        self.timed = scenario.model == "CIC"
        self.window = scenario.window if self.timed else None
        self._build_super_graph()
        self.singleton_upper = self._singleton_reach_counts()

    def _build_super_graph(self):
        g = self.scenario.graph
        n, R = self.n, self.R
        srcs, dsts, wts = [], [], []
        for r, real in enumerate(self.realizations):
            e = real.live_edges()
            srcs.append(g.src[e] + r * n)
            dsts.append(g.dst[e] + r * n)
            if self.timed:
                wts.append(real.delays[e])
        src = np.concatenate(srcs) if srcs else np.zeros(0, dtype=np.int64)
        dst = np.concatenate(dsts) if dsts else np.zeros(0, dtype=np.int64)
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(R * n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=R * n), out=indptr[1:])
        self.num_live_edges = int(src.size)
        self._indptr = indptr
        self._succ = dst[order].astype(np.int64)
        self._delay = np.concatenate(wts)[order].astype(float) if self.timed else None
        # scratch buffers shared by every traversal on this pool
        self._stack = np.empty(R * n, dtype=np.int64)
        self._touched = np.empty(R * n, dtype=np.int64)
        if self.timed:
            self._tent = np.full(R * n, np.inf)
            self._heap_d = np.empty(R + src.size, dtype=float)
            self._heap_u = np.empty(R + src.size, dtype=np.int64)

    def _singleton_reach_counts(self) -> np.ndarray:
        """Sum over worlds of ``|reach(v)|`` for every node ``v``.

        Exact for live-edge worlds. For CIC this ignores the window except
        through edge pruning, which makes it an upper bound.
        """
        n = self.n
        counts = np.zeros(n, dtype=np.int64)
        use_bits = n * ((n + 63) // 64) * 8 <= BITSET_BYTES
        if not use_bits:
            mark = np.zeros(n, dtype=np.int64)
            stack = np.empty(n, dtype=np.int64)
        for r in range(self.R):
            if use_bits:
                _k.reach_counts_world(self._indptr, self._succ, r * n, n, counts)
            else:
                _k.reach_counts_bfs(self._indptr, self._succ, r * n, n, counts, mark, stack)
        return counts

    @property
    def exact_singletons(self) -> bool:
        return not self.timed

    def coverage(self) -> "Coverage":
        return Coverage(self)

    def count(self, seeds: Iterable[int]) -> int:
        """Total covered super nodes for ``seeds`` (``R`` times the estimate)."""
        cov = Coverage(self)
        for v in _check_nodes(self.n, seeds):
            cov.add(v)
        return cov.count

    def per_realization(self, seeds: Iterable[int]) -> np.ndarray:
        cov = Coverage(self)
        for v in _check_nodes(self.n, seeds):
            cov.add(v)
        return cov.per_realization()

    def sample_sigma(self, seeds: Iterable[int]) -> float:
        """Standard error of :func:`estimate` over the pool's worlds."""
        if self.R < 2:
            return 0.0
        return float(np.std(self.per_realization(seeds), ddof=1) / math.sqrt(self.R))


def _check_nodes(n: int, seeds: Iterable[int]) -> list:
    out = sorted({int(v) for v in seeds})
    if out and (out[0] < 0 or out[-1] >= n):
        raise EstimationError(f"node outside [0, {n})")
    return out


class Coverage:
    """Mutable covered-set state of a growing seed set on one pool."""

    def __init__(self, pool: RealizationPool):
        self.pool = pool
        self.count = 0
        self.seeds = []
        size = pool.R * pool.n
        if pool.timed:
            self._dist = np.full(size, np.inf)
        else:
            self._covered = np.zeros(size, dtype=np.uint8)

    def copy(self) -> "Coverage":
        other = Coverage.__new__(Coverage)
        other.pool = self.pool
        other.count = self.count
        other.seeds = list(self.seeds)
        if self.pool.timed:
            other._dist = self._dist.copy()
        else:
            other._covered = self._covered.copy()
        return other

    def per_realization(self) -> np.ndarray:
        R, n = self.pool.R, self.pool.n
        if self.pool.timed:
            return (self._dist.reshape(R, n) <= self.pool.window).sum(axis=1)
        return self._covered.reshape(R, n).sum(axis=1, dtype=np.int64)

    def gain(self, v: int) -> int:
        """Extra covered super nodes if ``v`` joined the seed set."""
        p = self.pool
        if p.timed:
            return _k.timed_gain(p._indptr, p._succ, p._delay, self._dist, v, p.n, p.R,
                                 p.window, False, p._tent, p._touched, p._heap_d, p._heap_u)
        return _k.reach_gain(p._indptr, p._succ, self._covered, v, p.n, p.R,
                             p._stack, p._touched)

    def add(self, v: int) -> int:
        p = self.pool
        self.seeds.append(v)
        if p.timed:
            g = _k.timed_gain(p._indptr, p._succ, p._delay, self._dist, v, p.n, p.R,
                              p.window, True, p._tent, p._touched, p._heap_d, p._heap_u)
        else:
            g = _k.reach_add(p._indptr, p._succ, self._covered, v, p.n, p.R, p._stack)
        self.count += g
        return g


def build_pool(scenario: DiffusionScenario, R: int, seed=None) -> RealizationPool:
    """Sample ``R`` worlds of ``scenario``; deterministic given ``seed``."""
    if R < 1:
        raise EstimationError("pool size R must be >= 1")
    rng = np.random.default_rng(seed)
    g = scenario.graph
    if scenario.model == "DIC":
        live = rng.random((R, g.m)) < g.param
        reals = [Realization(scenario, live=live[r]) for r in range(R)]
    elif scenario.model == "DLT":
        reals = [Realization(scenario, live=sample_dlt_live(scenario, rng)) for _ in range(R)]
    else:
        delays = draw_delays(scenario.delay_family, np.broadcast_to(g.param, (R, g.m)), rng)
        reals = [Realization(scenario, delays=delays[r]) for r in range(R)]
    return RealizationPool(scenario, reals, seed)


def estimate(pool: RealizationPool, seeds: Iterable[int]) -> float:
    """Average spread of ``seeds`` over the pool's worlds."""
    return pool.count(seeds) / pool.R


@dataclass
class GreedyTrace:
    """Greedy seeds in pick order, with total covered counts after each pick."""

    seeds: list
    counts: list
    R: int
    gains: list = field(default_factory=list)

    @property
    def values(self) -> list:
        return [c / self.R for c in self.counts]

    @property
    def value(self) -> float:
        return self.counts[-1] / self.R if self.counts else 0.0

    @property
    def count(self) -> int:
        return self.counts[-1] if self.counts else 0


def lazy_greedy(pool: RealizationPool, budget: int) -> GreedyTrace:
    """CELF greedy on one pool.

    Picks the node of largest marginal gain at every step, ties to the lowest
    node id; stale gains serve as upper bounds and are refreshed only when
    they reach the top of the queue.
    """
    if budget < 0 or budget > pool.n:
        raise EstimationError(f"budget must lie in [0, {pool.n}]")
    cov = pool.coverage()
    fresh = 0 if pool.exact_singletons else -1
    heap = [(-int(c), v, fresh) for v, c in enumerate(pool.singleton_upper)]
    heapq.heapify(heap)
    seeds, counts, gains = [], [], []
    for step in range(budget):
        while True:
            neg, v, stamp = heapq.heappop(heap)
            if stamp == step:
                break
            heapq.heappush(heap, (-cov.gain(v), v, step))
        cov.add(v)
        seeds.append(v)
        gains.append(-neg)
        counts.append(cov.count)
    return GreedyTrace(seeds, counts, pool.R, gains)


def naive_greedy(pool: RealizationPool, budget: int) -> GreedyTrace:
    """Plain greedy that re-scores every candidate from scratch each step."""
    if budget < 0 or budget > pool.n:
        raise EstimationError(f"budget must lie in [0, {pool.n}]")
    seeds, counts, gains = [], [], []
    current = 0
    for _ in range(budget):
        best_v, best_c = None, -1
        for v in range(pool.n):
            if v in seeds:
                continue
            c = pool.count(seeds + [v])
            if c > best_c:
                best_v, best_c = v, c
        seeds.append(best_v)
        gains.append(best_c - current)
        counts.append(best_c)
        current = best_c
    return GreedyTrace(seeds, counts, pool.R, gains)
