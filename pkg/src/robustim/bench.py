"""Runtime sweeps over Kronecker instances and log-log slope fitting."""

from __future__ import annotations

import csv
import math
import time
from typing import Iterable, Optional, Sequence

import numpy as np

from .diffusion import DiffusionScenario
from .estimation import build_pool
from .generators import KroneckerSpec, kronecker_generate
from .robust import SaturateParams, all_greedy, compute_normalizers, saturate_greedy, single_greedy

ALGORITHMS = ("saturate", "single", "all")
CSV_COLUMNS = ("algorithm", "n", "num_scenarios", "k", "budget", "objective", "seconds", "seed")


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Least-squares slope of ``log y`` against ``log x``; None with fewer
    than two distinct x values."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.unique(xs).size < 2:
        return None
    lx, ly = np.log(xs), np.log(ys)
    return float(np.polyfit(lx, ly, 1)[0])


def kronecker_scenarios(structure: str, power: int, count: int, prob: float,
                        seed) -> list:
    spec = KroneckerSpec.for_structure(structure, power)
    rng = np.random.default_rng(seed)
    return [DiffusionScenario("DIC", kronecker_generate(spec, rng, prob), name=f"{structure}-{i}")
            for i in range(count)]


def time_point(scenarios: Sequence[DiffusionScenario], k: int, samples: int, seed,
               algorithms: Iterable[str] = ALGORITHMS, gamma: float = 0.1,
               beta: float = 1.0) -> list:
    """Run each algorithm once on one instance.

    Pool construction and the greedy normalizers are shared by all
    algorithms; their time is added to every algorithm's own time.
    """
    t0 = time.perf_counter()
    children = np.random.SeedSequence(seed).spawn(len(scenarios))
    pools = [build_pool(s, samples, c) for s, c in zip(scenarios, children)]
    inst = compute_normalizers(pools, k, seed)
    setup = time.perf_counter() - t0
    rows = []
    for algo in algorithms:
        if algo == "saturate":
            rec = saturate_greedy(inst, SaturateParams(gamma=gamma, beta=beta))
        elif algo == "single":
            rec = single_greedy(inst, k)
        elif algo == "all":
            rec = all_greedy(inst, k)
        else:
            raise ValueError(f"unknown algorithm {algo!r}")
        rows.append({
            "algorithm": algo, "n": inst.n, "num_scenarios": len(scenarios), "k": k,
            "budget": rec.budget, "objective": rec.objective,
            "seconds": setup + rec.seconds, "seed": seed,
        })
    return rows


def warm_up() -> None:
    """Trigger kernel compilation so it is not billed to the first timing."""
    sc = kronecker_scenarios("random", 4, 2, 0.1, 0)
    time_point(sc, 2, 2, 0)


def sweep(structure: str, powers: Sequence[int], scenario_counts: Sequence[int], k: int,
          prob: float, samples: int, seed: int, algorithms=ALGORITHMS,
          gamma: float = 0.1, beta: float = 1.0) -> list:
    """Every (power, |F|) combination; graph generation is not timed."""
    warm_up()
    rows = []
    for power in powers:
        for count in scenario_counts:
            sc = kronecker_scenarios(structure, power, count, prob, seed)
            kk = min(k, 2 ** power)
            rows.extend(time_point(sc, kk, samples, seed, algorithms, gamma, beta))
    return rows


def slopes(rows: Sequence[dict], by: str) -> dict:
    """Per-algorithm slope of log(seconds) against log(rows[by])."""
    out = {}
    for algo in dict.fromkeys(r["algorithm"] for r in rows):
        sel = [r for r in rows if r["algorithm"] == algo]
        out[algo] = loglog_slope([r[by] for r in sel], [r["seconds"] for r in sel])
    return out


def write_csv(rows: Sequence[dict], fh) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


def format_slope(value: Optional[float]) -> str:
    return "undefined" if value is None or math.isnan(value) else f"{value:.3f}"
