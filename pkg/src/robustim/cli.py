"""Command-line entry point: ingest, gen, perturb, run, eval, bench."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .bundle import BundleError, read_bundle, write_bundle
from .diffusion import DELAY_FAMILIES, MODELS, DiffusionScenario, ScenarioError
from .estimation import DEFAULT_SAMPLES, EstimationError
from .generators import (STRUCTURES, GeneratorError, KroneckerSpec, adversarial_instance,
                         kronecker_generate, setcover_fixture)
from .graph import GraphError, build_from_event_log, read_edge_list, read_event_log
from .perturbation import IntervalModel, PerturbationError, endpoint_sample
from .robust import (InstanceTooLarge, RobustError, SaturateParams, all_greedy, build_instance,
                     greedy_per_scenario, robust_objective, run_brute, saturate_greedy,
                     single_greedy)

RUN_ALGORITHMS = ("saturate", "single", "all", "greedy-per-scenario", "brute")
ERRORS = (BundleError, GraphError, ScenarioError, EstimationError, RobustError,
          GeneratorError, PerturbationError, OSError)


class UsageError(ValueError):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _int_list(text):
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustim",
                                description="Robust influence maximization over scenario bundles.")
    sub = p.add_subparsers(dest="command", required=True)

    ing = sub.add_parser("ingest", help="event log -> one scenario per category")
    ing.add_argument("--events", required=True, help="TSV: timestamp actor parent category")
    ing.add_argument("--top-k", type=_positive_int, required=True, help="keep the N most active actors")
    ing.add_argument("--param", type=float, default=1.0, help="edge parameter for every arc")
    ing.add_argument("--model", choices=MODELS, default="DIC")
    ing.add_argument("--window", type=_positive_float)
    ing.add_argument("--delay-family", choices=DELAY_FAMILIES, default="exponential")
    ing.add_argument("--out", required=True, help="bundle directory")

    gen = sub.add_parser("gen", help="synthetic bundles")
    gsub = gen.add_subparsers(dest="kind", required=True)
    kr = gsub.add_parser("kronecker")
    kr.add_argument("--structure", choices=sorted(STRUCTURES), default="random")
    kr.add_argument("--seed-matrix", help="four entries a,b,c,d; overrides --structure scaling")
    kr.add_argument("--power", type=_positive_int, required=True, help="n = 2**power")
    kr.add_argument("--count", type=_positive_int, default=5, help="number of scenarios")
    kr.add_argument("--prob", type=float, default=0.1, help="DIC edge probability")
    kr.add_argument("--mean-degree", type=_positive_float, default=10.0)
    kr.add_argument("--rng-seed", type=int, default=0)
    kr.add_argument("--out", required=True)
    adv = gsub.add_parser("adversarial")
    adv.add_argument("--k", type=_positive_int, required=True)
    adv.add_argument("--m", type=_positive_int, required=True)
    adv.add_argument("--out", required=True)
    sc = gsub.add_parser("setcover")
    sc.add_argument("--sets", required=True, help='sets over integer elements, e.g. "1,2;2,3"')
    sc.add_argument("--m", type=_positive_int, required=True)
    sc.add_argument("--model", choices=("DIC", "CIC"), default="DIC")
    sc.add_argument("--window", type=_positive_float)
    sc.add_argument("--out", required=True)

    per = sub.add_parser("perturb", help="interval endpoints of one DIC graph -> bundle")
    per.add_argument("--graph", required=True, help="edge list with probabilities")
    per.add_argument("--q", type=float, required=True, help="relative interval half-width")
    per.add_argument("--endpoint-samples", type=int, default=10)
    per.add_argument("--rng-seed", type=int, default=0)
    per.add_argument("--out", required=True)

    run = sub.add_parser("run", help="optimize a seed set on a bundle")
    _instance_args(run)
    run.add_argument("--algo", choices=RUN_ALGORITHMS, default="saturate")
    run.add_argument("--budget", type=_positive_float, action="append",
                     help="seed budget as a multiple of k (repeatable); for saturate this "
                          "is beta, default 1 + ln|F| + ln(3/gamma)")
    run.add_argument("--gamma", type=float, default=0.1)
    run.add_argument("--threads", type=_positive_int, default=1, help="worker cap (runs are serial)")
    run.add_argument("--out", help="JSON-lines path; a CSV summary goes next to it")

    ev = sub.add_parser("eval", help="score a given seed set on a bundle")
    _instance_args(ev)
    ev.add_argument("--seeds", type=_int_list, required=True, help="comma-separated node ids")

    be = sub.add_parser("bench", help="timing sweep on Kronecker instances")
    be.add_argument("--structure", choices=sorted(STRUCTURES), default="random")
    be.add_argument("--powers", type=_int_list, default=[7, 8, 9, 10, 11, 12],
                    help="graph sizes as powers of two")
    be.add_argument("--scenarios", type=_int_list, default=[5], help="scenario counts")
    be.add_argument("--k", type=_positive_int, default=50)
    be.add_argument("--prob", type=float, default=0.1)
    be.add_argument("--samples", type=_positive_int, default=50)
    be.add_argument("--rng-seed", type=int, default=0)
    be.add_argument("--algo", choices=bench.ALGORITHMS, action="append")
    be.add_argument("--gamma", type=float, default=0.1)
    be.add_argument("--beta", type=float, default=1.0, help="saturate budget multiplier")
    be.add_argument("--threads", type=_positive_int, default=1)
    be.add_argument("--out", help="CSV path (default stdout)")
    return p


def _instance_args(p):
    p.add_argument("--bundle", required=True, help="bundle directory or manifest.json")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES,
                   help="sampled worlds per scenario (R)")
    p.add_argument("--rng-seed", type=int, default=0)


def cmd_ingest(args) -> int:
    graphs = build_from_event_log(read_event_log(args.events), args.top_k, args.param)
    scenarios = [DiffusionScenario(args.model, g, window=args.window,
                                   delay_family=args.delay_family, name=cat)
                 for cat, g in graphs.items()]
    path = write_bundle(args.out, scenarios, {"source": str(args.events), "top_k": args.top_k})
    names = graphs[next(iter(graphs))].names
    (Path(args.out) / "nodes.tsv").write_text(
        "".join(f"{i}\t{a}\n" for i, a in enumerate(names)), encoding="utf-8")
    print(f"wrote {len(scenarios)} scenarios to {path}")
    return 0


def cmd_gen(args) -> int:
    if args.kind == "kronecker":
        if not 0 <= args.prob <= 1:
            raise UsageError("--prob must lie in [0, 1]")
        if args.seed_matrix:
            vals = [float(x) for x in args.seed_matrix.split(",")]
            if len(vals) != 4:
                raise UsageError("--seed-matrix needs four entries")
            spec = KroneckerSpec((tuple(vals[:2]), tuple(vals[2:])), args.power)
        else:
            spec = KroneckerSpec.for_structure(args.structure, args.power, args.mean_degree)
        rng = np.random.default_rng(args.rng_seed)
        scenarios = [DiffusionScenario("DIC", kronecker_generate(spec, rng, args.prob),
                                       name=f"{spec.structure}-{i}") for i in range(args.count)]
        meta = {"generator": "kronecker", "seed_matrix": spec.seed, "power": args.power,
                "rng_seed": args.rng_seed}
    elif args.kind == "adversarial":
        scenarios = adversarial_instance(args.k, args.m)
        meta = {"generator": "adversarial", "k": args.k, "m": args.m}
    else:
        sets = [[int(x) for x in part.split(",") if x.strip()] for part in args.sets.split(";")]
        universe = sorted(set().union(*map(set, sets)))
        scenarios = setcover_fixture(universe, sets, args.m, args.model, args.window)
        meta = {"generator": "setcover", "sets": sets, "m": args.m}
    path = write_bundle(args.out, scenarios, meta)
    print(f"wrote {len(scenarios)} scenarios to {path}")
    return 0


def cmd_perturb(args) -> int:
    if args.endpoint_samples < 0:
        raise UsageError("--endpoint-samples must be >= 0")
    model = IntervalModel.relative(read_edge_list(args.graph), args.q)
    scenarios = endpoint_sample(model, args.endpoint_samples, np.random.default_rng(args.rng_seed))
    path = write_bundle(args.out, scenarios, {"q": args.q, "rng_seed": args.rng_seed})
    print(f"wrote {len(scenarios)} scenarios to {path}")
    return 0


def _load_instance(args):
    scenarios = read_bundle(args.bundle)
    n = scenarios[0].n
    if args.k > n:
        raise UsageError(f"--k {args.k} exceeds the node count {n}")
    return build_instance(scenarios, args.k, args.samples, args.rng_seed)


def _budget_of(k, mult, n):
    return min(n, max(1, int(round(mult * k))))


def cmd_run(args) -> int:
    if not 0 < args.gamma < 1:
        raise UsageError("--gamma must lie in (0, 1)")
    mults = args.budget or [None]
    if args.algo == "saturate" and any(m is not None and m < 1 for m in mults):
        raise UsageError("saturate needs --budget >= 1")
    scenarios = read_bundle(args.bundle)
    if args.k > scenarios[0].n:
        raise UsageError(f"--k {args.k} exceeds the node count {scenarios[0].n}")
    if args.algo == "brute":
        # refuse before paying for pools and normalizers
        from .robust import BRUTE_FORCE_MAX_K, BRUTE_FORCE_MAX_N
        if scenarios[0].n > BRUTE_FORCE_MAX_N or args.k > BRUTE_FORCE_MAX_K:
            raise InstanceTooLarge(
                f"instance too large for brute force (n={scenarios[0].n}, k={args.k}; "
                f"limits n<={BRUTE_FORCE_MAX_N}, k<={BRUTE_FORCE_MAX_K})")
    inst = build_instance(scenarios, args.k, args.samples, args.rng_seed)
    records = []
    for mult in mults:
        if args.algo == "saturate":
            records.append(saturate_greedy(inst, SaturateParams(args.gamma, mult)))
            continue
        budget = _budget_of(args.k, 1.0 if mult is None else mult, inst.n)
        if args.algo == "single":
            records.append(single_greedy(inst, budget))
        elif args.algo == "all":
            records.append(all_greedy(inst, budget))
        elif args.algo == "greedy-per-scenario":
            records.extend(greedy_per_scenario(inst, budget))
        else:
            records.append(run_brute(inst))
    lines = "".join(r.to_json() + "\n" for r in records)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(lines, encoding="utf-8")
        with open(out.with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
            bench.write_csv([_summary(r, inst) for r in records], fh)
        for r in records:
            print(f"{r.algorithm}\tbudget={r.budget}\tobjective={r.objective:.6f}")
    else:
        sys.stdout.write(lines)
    return 0


def _summary(rec, inst) -> dict:
    return {"algorithm": rec.algorithm, "n": inst.n, "num_scenarios": len(inst.pools),
            "k": rec.k, "budget": rec.budget, "objective": rec.objective,
            "seconds": rec.seconds, "seed": rec.rng_seed}


def cmd_eval(args) -> int:
    inst = _load_instance(args)
    bad = [v for v in args.seeds if not 0 <= v < inst.n]
    if bad:
        raise UsageError(f"seed ids outside [0, {inst.n}): {bad}")
    ratios = inst.ratios(args.seeds)
    doc = {"seeds": args.seeds, "ratios": ratios, "objective": robust_objective(inst, args.seeds),
           "normalizers": inst.normalizers, "k": args.k, "samples": args.samples,
           "rng_seed": args.rng_seed}
    print(json.dumps(doc, sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    if any(p < 1 for p in args.powers) or any(c < 1 for c in args.scenarios):
        raise UsageError("--powers and --scenarios must be positive")
    if not 0 <= args.prob <= 1:
        raise UsageError("--prob must lie in [0, 1]")
    algos = tuple(args.algo or bench.ALGORITHMS)
    rows = bench.sweep(args.structure, args.powers, args.scenarios, args.k, args.prob,
                       args.samples, args.rng_seed, algos, args.gamma, args.beta)
    buf = io.StringIO()
    bench.write_csv(rows, buf)
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    report = sys.stderr if not args.out else sys.stdout
    print(f"# samples per scenario R={args.samples}", file=report)
    for by in ("n", "num_scenarios"):
        for algo, s in bench.slopes(rows, by).items():
            print(f"# slope log(seconds) vs log({by}) {algo}: {bench.format_slope(s)}", file=report)
    return 0


COMMANDS = {"ingest": cmd_ingest, "gen": cmd_gen, "perturb": cmd_perturb, "run": cmd_run,
            "eval": cmd_eval, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, *ERRORS) as exc:
        print(f"robustim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
