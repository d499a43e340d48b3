"""Command line entry point: ``saopt {run,baseline,report,front}``."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from ..sims import analytic_front
from .config import ExperimentConfig, load_config
from .loops import run_single
from .report import export_results, summarize, union_reference_front


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file or a run manifest")
    p.add_argument("--problem", choices=("cps1", "cps2", "psa_proxy"))
    p.add_argument("--mode", choices=("direct", "surrogate"))
    p.add_argument("--algorithm", choices=("ga", "nsga2"))
    p.add_argument("--generations", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory (default: results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saopt", description="Surrogate-assisted evolutionary optimisation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run experiments and export their results")
    _add_run_flags(run)
    base = sub.add_parser("baseline", help="like run, with every evaluation sent to the simulator")
    _add_run_flags(base)
    rep = sub.add_parser("report", help="pair exported direct/surrogate runs and print call ratios")
    rep.add_argument("--out", default="results")
    front = sub.add_parser("front", help="write a reference front CSV")
    front.add_argument("--problem", default="psa_proxy", choices=("psa_proxy",))
    front.add_argument("--source", default="analytic", choices=("analytic", "direct"),
                       help="closed-form proxy front, or union of exported direct-mode fronts")
    front.add_argument("--points", type=int, default=100)
    front.add_argument("--out", default="results")
    return parser


def _config_from(args, force_mode: str | None = None) -> tuple[ExperimentConfig, list[int]]:
    base: dict = {}
    reps = None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        if "manifest_version" in raw:
            reps = [int(raw["repetition"])]
        base = load_config(args.config).to_dict()
    if args.problem is not None and args.problem != base.get("problem"):
        # sizes resolved for another problem no longer apply
        for k in ("algorithm", "generations", "population", "offspring"):
            base.pop(k, None)
    for name in ("problem", "mode", "algorithm", "generations", "repetitions", "seed", "workers", "out"):
        v = getattr(args, name)
        if v is not None:
            base[name] = v
    if force_mode:
        base["mode"] = force_mode
    cfg = ExperimentConfig.from_dict(base)
    if reps is None or args.repetitions is not None:
        reps = list(range(cfg.repetitions))
    return cfg, reps


def _run(args, force_mode=None) -> int:
    cfg, reps = _config_from(args, force_mode)
    for r in reps:
        res = run_single(cfg, r)
        paths = export_results(res, cfg.out)
        last = res.records[-1]
        quality = f"best={last.best_so_far:.6g}" if cfg.algorithm == "ga" else f"hv={last.hv:.6g}"
        print(f"{res.experiment_id}: generations={len(res.records)} sim_calls={last.sim_calls} "
              f"retrains={last.retrains} {quality} -> {os.path.dirname(paths['manifest'])}")
    return 0


def _report(args) -> int:
    rows = summarize(args.out)
    if not rows:
        print(f"no matched direct/surrogate runs under {args.out}", file=sys.stderr)
        return 1
    for r in rows:
        print(f"{r['problem']} {r['algorithm']} seed={r['seed']} rep={r['repetition']}: "
              f"sim calls {r['direct_sim_calls']} / {r['surrogate_sim_calls']} = {r['sim_call_ratio']:.3f}, "
              f"wall ratio {r['wall_time_ratio']:.3f}")
    ratios = [r["sim_call_ratio"] for r in rows]
    print(f"mean sim-call ratio {np.mean(ratios):.3f} over {len(rows)} pairs")
    with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2)
    return 0


def _front(args) -> int:
    if args.source == "analytic":
        F = analytic_front(args.points)
    else:
        F = union_reference_front(args.out, args.problem)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"reference_front_{args.problem}_{args.source}.csv")
    np.savetxt(path, F, delimiter=",", header="purity,recovery", comments="", fmt="%.17g")
    print(f"{len(F)} points -> {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "baseline":
            return _run(args, force_mode="direct")
        if args.command == "report":
            return _report(args)
        return _front(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"saopt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
