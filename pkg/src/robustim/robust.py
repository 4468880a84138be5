"""Robust influence maximization over a finite set of influence functions.

Ratios are measured against each scenario's greedy ``k``-seed spread (the
normalizer), so the robust objective of a seed set ``S`` is::

    min over scenarios F of  spread_F(S) / spread_F(greedy_F)

All spreads here are integer covered counts on each scenario's pool, and all
greedy comparisons are made in exact integer arithmetic over a common
denominator.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .diffusion import DiffusionScenario
from .estimation import GreedyTrace, RealizationPool, build_pool, lazy_greedy

BRUTE_FORCE_MAX_N = 15
BRUTE_FORCE_MAX_K = 3


class RobustError(ValueError):
    pass


class InstanceTooLarge(RobustError):
    pass


@dataclass
class RobustInstance:
    """Scenarios with their pools and greedy normalizers at budget ``k``."""

    pools: list
    k: int
    norm_counts: list
    traces: list
    rng_seed: Optional[int] = None

    @property
    def scenarios(self) -> list:
        return [p.scenario for p in self.pools]

    @property
    def n(self) -> int:
        return self.pools[0].n

    @property
    def normalizers(self) -> list:
        """Per-scenario greedy spread ``c_F`` (an estimate, in nodes)."""
        return [c / p.R for c, p in zip(self.norm_counts, self.pools)]

    @property
    def samples(self) -> int:
        return self.pools[0].R

    def ratios(self, seeds: Iterable[int]) -> list:
        seeds = list(seeds)
        return [p.count(seeds) / c for p, c in zip(self.pools, self.norm_counts)]


def compute_normalizers(pools: Sequence[RealizationPool], k: int,
                        rng_seed: Optional[int] = None) -> RobustInstance:
    """Run greedy on every pool at budget ``k`` and keep its spread as ``c_F``."""
    if not pools:
        raise RobustError("need at least one scenario")
    if k < 1:
        raise RobustError("k must be >= 1")
    n = pools[0].n
    if any(p.n != n for p in pools):
        raise RobustError("all scenarios must share one node set")
    if k > n:
        raise RobustError(f"k={k} exceeds the node count {n}")
    traces = [lazy_greedy(p, k) for p in pools]
    counts = [t.count for t in traces]
    if any(c <= 0 for c in counts):
        raise RobustError("a scenario has zero greedy spread; its ratio is undefined")
    return RobustInstance(list(pools), k, counts, traces, rng_seed)


def build_instance(scenarios: Sequence[DiffusionScenario], k: int, samples: int,
                   rng_seed: Optional[int] = None) -> RobustInstance:
    """Pools with independent child seeds of ``rng_seed``, then normalizers."""
    children = np.random.SeedSequence(rng_seed).spawn(len(scenarios))
    pools = [build_pool(s, samples, child) for s, child in zip(scenarios, children)]
    return compute_normalizers(pools, k, rng_seed)


def robust_objective(inst: RobustInstance, seeds: Iterable[int]) -> float:
    seeds = list(seeds)
    if not seeds:
        return 0.0
    return min(inst.ratios(seeds))


@dataclass
class SaturateParams:
    gamma: float = 0.1
    beta: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise RobustError("gamma must lie in (0, 1)")
        if self.beta is not None and self.beta < 1:
            raise RobustError("beta must be >= 1")

    def resolved_beta(self, num_scenarios: int) -> float:
        if self.beta is not None:
            return self.beta
        return theorem_beta(num_scenarios, self.gamma)


def theorem_beta(num_scenarios: int, gamma: float) -> float:
    """Seed-budget multiplier ``1 + ln|F| + ln(3/gamma)``."""
    return 1.0 + math.log(num_scenarios) + math.log(3.0 / gamma)


def iteration_bound(gamma: float) -> int:
    return math.ceil(math.log(1.0 / gamma) / math.log(6.0 / 5.0)) + 2


@dataclass
class RunRecord:
    algorithm: str
    k: int
    budget: int
    seeds: list
    ratios: list
    objective: float
    seconds: float
    rng_seed: Optional[int]
    samples: int
    sample_sigma: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _record(inst: RobustInstance, algorithm: str, budget: int, seeds: list,
            seconds: float, **extra) -> RunRecord:
    seeds = [int(v) for v in seeds]
    ratios = inst.ratios(seeds) if seeds else [0.0] * len(inst.pools)
    sigma = [p.sample_sigma(seeds) / c * p.R for p, c in zip(inst.pools, inst.norm_counts)]
    return RunRecord(algorithm, inst.k, int(budget), seeds, ratios,
                     min(ratios) if seeds else 0.0, seconds, inst.rng_seed,
                     inst.samples, sigma, extra)


def greedy_mintss(f: Callable[[frozenset], float], ground: Iterable[int], k: Optional[int],
                  eta: float, eps: float, max_size: Optional[int] = None):
    """Grow a set greedily until ``f(S) >= eta - eps``.

    ``f`` is any monotone set function over ``ground``; each step adds the
    element maximizing ``f(S | {v})``, lowest id on ties. ``k`` is accepted
    for signature parity and not used. Growth also stops once ``|S|`` exceeds
    ``max_size`` or the ground set is exhausted.

    Returns ``(S, reached)`` with ``S`` in pick order.
    """
    if eps <= 0:
        raise RobustError("eps must be positive")
    ground = sorted(ground)
    S = []
    chosen = set()
    value = f(frozenset())
    while value < eta - eps:
        if len(S) == len(ground) or (max_size is not None and len(S) > max_size):
            return S, False
        best_v, best_val = None, None
        for v in ground:
            if v in chosen:
                continue
            val = f(frozenset(chosen | {v}))
            if best_val is None or val > best_val:
                best_v, best_val = v, val
        S.append(best_v)
        chosen.add(best_v)
        value = best_val
    return S, True


class _Scale:
    """Common integer scale for normalized ratios across scenarios.

    ``ratio_F(count) * L == count * mult[F]`` with ``L`` the lcm of all
    normalizer counts (times the denominator of ``c`` when a saturation
    level is involved).
    """

    def __init__(self, norm_counts: Sequence[int], c: Optional[float] = None):
        L = math.lcm(*norm_counts)
        self.cap = None
        if c is not None:
            frac = Fraction(c)
            L *= frac.denominator
            self.cap = frac.numerator * (L // frac.denominator)
        self.L = L
        self.mult = [L // nc for nc in norm_counts]


def mintss_pooled(inst: RobustInstance, c: float, eps: float,
                  max_size: Optional[int] = None):
    """Greedy Mintss on ``H_c(S) = sum_F min(c, ratio_F(S))``, threshold ``c|F|``.

    Same contract as :func:`greedy_mintss` with ``f = H_c``, evaluated with
    lazy (CELF) marginal gains in exact arithmetic. Returns ``(S, reached)``.
    """
    pools = inst.pools
    scale = _Scale(inst.norm_counts, c)
    cap, mult, L = scale.cap, scale.mult, scale.L
    F = len(pools)
    eta = Fraction(c) * F
    target = (eta - Fraction(eps)) * L  # H scaled by L must reach this
    covs = [p.coverage() for p in pools]
    terms = [0] * F
    if 0 >= target:
        return [], True
    n = inst.n
    norm = np.asarray(inst.norm_counts, dtype=float)
    # stale per-scenario gains bound the fresh ones (submodularity); the
    # truncated gain of v is sum_F min(room_F, gain_F(v) * mult_F)
    stale = np.stack([p.singleton_upper.astype(float) for p in pools], axis=1)
    chosen = np.zeros(n, dtype=bool)
    S = []
    while sum(terms) < target:
        if len(S) == n or (max_size is not None and len(S) > max_size):
            return S, False
        room = [cap - t for t in terms]
        room_f = np.array([r / L for r in room])
        bound = np.minimum(room_f[None, :], stale / norm[None, :]).sum(axis=1)
        bound = bound * (1 + 1e-9)
        bound[chosen] = -np.inf
        order = np.lexsort((np.arange(n), -bound))
        open_f = [f for f in range(F) if room[f] > 0]
        best_gain, best_v, best_f = -1, None, None
        for v in order.tolist():
            if chosen[v]:
                break
            if best_v is not None:
                if bound[v] < best_f or bound[v] <= 0.0:
                    break
                # near-ties: the exact bound decides whether v could still win
                exact = sum(min(room[f], int(stale[v, f]) * mult[f]) for f in open_f)
                if exact < best_gain or (exact == best_gain and v > best_v):
                    continue
            gain = 0
            for f in open_f:
                g = covs[f].gain(v)
                stale[v, f] = g
                gain += min(room[f], g * mult[f])
            if gain > best_gain or (gain == best_gain and v < best_v):
                best_gain, best_v, best_f = gain, v, gain / L
        chosen[best_v] = True
        for f in open_f:
            covs[f].add(best_v)
            terms[f] = min(cap, covs[f].count * mult[f])
        S.append(best_v)
    return S, True


def saturate_greedy(inst: RobustInstance, params: SaturateParams = None) -> RunRecord:
    """Saturate Greedy: binary search on the saturation level ``c``.

    For each midpoint ``c``, Greedy Mintss looks for a set whose truncated
    sum reaches ``c|F| - c*gamma/3``. A set larger than ``beta*k`` moves the
    upper end down; otherwise the set is kept and the lower end moves up to
    ``c * (1 - gamma/3)``.
    """
    params = params or SaturateParams()
    t0 = time.perf_counter()
    gamma = params.gamma
    beta = params.resolved_beta(len(inst.pools))
    size_cap = math.floor(beta * inst.k + 1e-9)
    c_min, c_max = 0.0, 1.0
    best = []
    iterations = 0
    history = []
    while c_max - c_min >= gamma:
        iterations += 1
        c = (c_max + c_min) / 2.0
        S, reached = mintss_pooled(inst, c, c * gamma / 3.0, max_size=size_cap)
        if not reached or len(S) > size_cap:
            c_max = c
            history.append((c, len(S), False))
        else:
            c_min = c * (1.0 - gamma / 3.0)
            best = S
            history.append((c, len(S), True))
    seconds = time.perf_counter() - t0
    return _record(inst, "saturate", size_cap, best, seconds,
                   beta=beta, gamma=gamma, iterations=iterations,
                   c_min=c_min, c_max=c_max, history=history)


def single_greedy(inst: RobustInstance, budget: int) -> RunRecord:
    """Greedy on the robust objective itself.

    Each step adds the node maximizing the robust objective of ``S + v``;
    ties go to the larger sum of normalized ratios, then the lowest id. The
    sum tie-break is what moves the search off the flat start, where a
    single uncovered scenario pins the minimum.
    """
    n = inst.n
    if budget < 0 or budget > n:
        raise RobustError(f"budget must lie in [0, {n}]")
    t0 = time.perf_counter()
    pools = inst.pools
    F = len(pools)
    scale = _Scale(inst.norm_counts)
    norm = np.asarray(inst.norm_counts, dtype=float)
    covs = [p.coverage() for p in pools]
    # stale per-scenario marginal gains are upper bounds (submodularity)
    gains = np.stack([p.singleton_upper.astype(float) for p in pools], axis=1)
    chosen = np.zeros(n, dtype=bool)
    S = []
    for _ in range(budget):
        counts = np.array([cv.count for cv in covs], dtype=float)
        ratio_ub = (counts[None, :] + gains) / norm[None, :]
        # inflated so float rounding never undercuts the exact bound
        ub_min = ratio_ub.min(axis=1) * (1 + 1e-9)
        ub_sum = ratio_ub.sum(axis=1) * (1 + 1e-9)
        ub_min[chosen] = -np.inf
        ub_sum[chosen] = -np.inf
        order = np.lexsort((np.arange(n), -ub_sum, -ub_min))
        best_key, best_f, best_v = None, None, None
        for v in order.tolist():
            if chosen[v]:
                break
            if best_f is not None:
                if (ub_min[v], ub_sum[v]) < best_f:
                    break
                ub = [(covs[f].count + int(gains[v, f])) * scale.mult[f] for f in range(F)]
                if (min(ub), sum(ub), -v) <= best_key:
                    continue
            g = [cv.gain(v) for cv in covs]
            gains[v] = g
            vals = [(covs[f].count + g[f]) * scale.mult[f] for f in range(F)]
            key = (min(vals), sum(vals), -v)
            if best_key is None or key > best_key:
                best_key, best_v = key, v
                best_f = (key[0] / scale.L, key[1] / scale.L)
        chosen[best_v] = True
        for cv in covs:
            cv.add(best_v)
        S.append(best_v)
    seconds = time.perf_counter() - t0
    return _record(inst, "single", budget, S, seconds)


def all_greedy(inst: RobustInstance, budget: int) -> RunRecord:
    """Best per-scenario greedy set under the robust objective.

    Ties keep the earliest scenario.
    """
    n = inst.n
    if budget < 0 or budget > n:
        raise RobustError(f"budget must lie in [0, {n}]")
    t0 = time.perf_counter()
    if budget == inst.k:
        traces = inst.traces
    else:
        traces = [lazy_greedy(p, budget) for p in inst.pools]
    scale = _Scale(inst.norm_counts)
    best, best_val, best_idx = [], None, None
    for i, tr in enumerate(traces):
        val = min(p.count(tr.seeds) * m for p, m in zip(inst.pools, scale.mult)) if tr.seeds else 0
        if best_val is None or val > best_val:
            best, best_val, best_idx = tr.seeds, val, i
    seconds = time.perf_counter() - t0
    return _record(inst, "all", budget, list(best), seconds, scenario=best_idx)


def greedy_per_scenario(inst: RobustInstance, budget: int) -> list:
    """One record per scenario: that scenario's own greedy set."""
    out = []
    for i, p in enumerate(inst.pools):
        t0 = time.perf_counter()
        tr = inst.traces[i] if budget == inst.k else lazy_greedy(p, budget)
        out.append(_record(inst, "greedy-per-scenario", budget, tr.seeds,
                           time.perf_counter() - t0, scenario=i))
    return out


def brute_force_robust_opt(inst: RobustInstance, budget: Optional[int] = None):
    """Exact maximizer of the robust objective over sets of size ``budget``.

    Monotonicity means only sets of exactly ``min(budget, n)`` nodes need to
    be scanned; ties keep the lexicographically first set.
    """
    n = inst.n
    k = inst.k if budget is None else budget
    if n > BRUTE_FORCE_MAX_N or k > BRUTE_FORCE_MAX_K:
        raise InstanceTooLarge(
            f"instance too large for brute force (n={n}, k={k}; limits n<={BRUTE_FORCE_MAX_N}, "
            f"k<={BRUTE_FORCE_MAX_K})")
    scale = _Scale(inst.norm_counts)
    best_set, best_val = (), -1
    for combo in itertools.combinations(range(n), min(k, n)):
        val = min(p.count(combo) * m for p, m in zip(inst.pools, scale.mult))
        if val > best_val:
            best_set, best_val = combo, val
    return list(best_set), best_val / scale.L


def run_brute(inst: RobustInstance) -> RunRecord:
    t0 = time.perf_counter()
    S, _ = brute_force_robust_opt(inst)
    return _record(inst, "brute", inst.k, S, time.perf_counter() - t0)
