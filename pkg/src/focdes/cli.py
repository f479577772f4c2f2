"""Command-line front end.

Subcommands: simulate, optimize, robustness, compromise, grid.  Every
invocation echoes a manifest into the output directory for provenance.
Exit codes: 0 success, 1 runtime divergence or aborted run, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (CaseSpec, FAMILIES, RobustnessSpec, VARIANTS, MooConfig,
                          aggregate_boxplots, metrics_row, n_var_for,
                          robustness_sweep, run_case, run_grid, trace_verdict,
                          write_boxplots_csv, write_case_outputs, write_grid_outputs,
                          write_metrics_csv)
from .fractional import FopidParams, realize_controller
from .pareto import CRITERIA, ParetoFront, RunProvenance, best_compromise, select_best_front
from .plant import PlantConfig, evaluate_objectives, nominal_config, simulate

SETTLE_BAND = 1e-3   # Hz, band for settling-time reporting


class UsageError(Exception):
    pass


def _load_json(path: str, what: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed {what} file {path!r}: line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from exc


def _apply_overrides(data: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise UsageError(f"override path {key!r} crosses a non-object value")
        node[parts[-1]] = value
    return data


def _plant_config(args) -> PlantConfig:
    data = _load_json(args.config, "config") if args.config else nominal_config().to_dict()
    data = _apply_overrides(data, args.set or [])
    try:
        return PlantConfig.from_dict(data)
    except ValueError as exc:
        raise UsageError(f"invalid plant config: {exc}") from exc


def _controller_pair(path: str) -> tuple[FopidParams, FopidParams]:
    data = _load_json(path, "controller parameters")
    try:
        return (FopidParams.from_dict(data["area1"]),
                FopidParams.from_dict(data["area2"]))
    except KeyError as exc:
        raise UsageError(f"controller file {path!r} must define field {exc.args[0]!r}")
    except ValueError as exc:
        raise UsageError(f"controller file {path!r}: {exc}") from exc


def _write_manifest(out: Path, args, extra: dict | None = None) -> None:
    manifest = {
        "subcommand": args.command,
        "config_path": getattr(args, "config", None),
        "output_dir": str(out),
        "overrides": getattr(args, "set", None) or [],
        "version": __version__,
    }
    manifest.update(extra or {})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _summary(trace) -> dict:
    obj = evaluate_objectives(trace)
    peak1 = float(np.nanmax(np.abs(trace.df1)))
    peak2 = float(np.nanmax(np.abs(trace.df2)))

    def settle(ch):
        bad = np.where(np.abs(ch) >= SETTLE_BAND)[0]
        if bad.size == 0:
            return 0.0
        if bad[-1] == len(ch) - 1:
            return None
        return float(trace.t[bad[-1] + 1])

    s1 = settle(trace.df1) if not trace.diverged else None
    s2 = settle(trace.df2) if not trace.diverged else None
    return {
        "itse": obj.j1_itse,
        "isdco": obj.j2_isdco,
        "peak_abs_df1": peak1,
        "peak_abs_df2": peak2,
        "settling_time_df1": s1,
        "settling_time_df2": s2,
        "diverged": trace.diverged,
        "divergence_time": trace.divergence_time,
    }


def cmd_simulate(args) -> int:
    config = _plant_config(args)
    p1, p2 = _controller_pair(args.params)
    trace = simulate(config, realize_controller(p1), realize_controller(p2))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.csv").write_text(trace.to_csv())
    (out / "summary.json").write_text(json.dumps(_summary(trace), indent=2) + "\n")
    _write_manifest(out, args)
    return 1 if trace.diverged else 0


def cmd_optimize(args) -> int:
    config = _plant_config(args)
    case = CaseSpec(controller_family=args.family, optimizer_variant=args.variant,
                    runs=args.runs, base_seed=args.seed)
    moo = MooConfig.for_n_var(n_var_for(args.family),
                              **({"pop_size": args.pop} if args.pop else {}),
                              **({"max_gen": args.generations} if args.generations else {}))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = run_case(case, config, moo)
    write_case_outputs(out, case, results)
    rows = [metrics_row(case, i, r) for i, r in enumerate(results)]
    write_metrics_csv(out, rows)
    reports = {case.key: [
        {"hypervolume": r.metrics.hypervolume, "spacing": r.metrics.spacing,
         "spread": r.metrics.spread, "diversity": r.metrics.diversity,
         "seconds": r.wall_seconds} for r in results]}
    write_boxplots_csv(out, aggregate_boxplots(reports))
    _write_manifest(out, args, {"case": case.key, "runs": case.runs,
                                "base_seed": case.base_seed})
    return 0


def cmd_robustness(args) -> int:
    config = _plant_config(args)
    p1, p2 = _controller_pair(args.params)
    try:
        factors = [float(v) for v in args.t12_factors.split(",") if v]
    except ValueError as exc:
        raise UsageError(f"bad --t12-factors value {args.t12_factors!r}: {exc}") from exc
    spec = RobustnessSpec(t12_factors=factors, random_load=args.random_load,
                          load_seed=args.seed)
    out = Path(args.out)
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)
    verdicts = {}
    any_diverged = False
    for label, trace in robustness_sweep((p1, p2), config, spec):
        (traces_dir / f"{label}.csv").write_text(trace.to_csv())
        verdicts[label] = trace_verdict(trace)
        any_diverged |= trace.diverged
    (out / "robustness.json").write_text(json.dumps(verdicts, indent=2) + "\n")
    _write_manifest(out, args, {"scenarios": sorted(verdicts)})
    return 1 if any_diverged else 0


def cmd_compromise(args) -> int:
    fronts_dir = Path(args.fronts_dir)
    files = sorted(fronts_dir.rglob("run*.csv"))
    fronts = []
    for f in files:
        prov = RunProvenance()
        prov_file = f.with_name(f.stem + ".provenance.json")
        if prov_file.exists():
            data = json.loads(prov_file.read_text())
            prov = RunProvenance(variant=data.get("variant", "uniform"),
                                 seed=int(data.get("seed", 0)),
                                 run_index=int(data.get("run_index", 0)),
                                 generations=int(data.get("generations", 0)))
        fronts.append(ParetoFront.from_csv(f.read_text(), provenance=prov))
    if not fronts:
        raise UsageError(f"no front CSV files under {fronts_dir}")
    best_front = select_best_front(fronts, args.criterion)
    idx = best_compromise(best_front)
    payload = {
        "criterion": args.criterion,
        "variant": best_front.provenance.variant,
        "seed": best_front.provenance.seed,
        "run": best_front.provenance.run_index,
        "genome": [float(v) for v in best_front.genomes[idx]],
        "itse": float(best_front.objectives[idx, 0]),
        "isdco": float(best_front.objectives[idx, 1]),
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "compromise.json").write_text(json.dumps(payload, indent=2) + "\n")
    _write_manifest(out, args, {"fronts_dir": str(fronts_dir)})
    return 0


def cmd_grid(args) -> int:
    config = _plant_config(args)
    overrides = {}
    if args.pop:
        overrides["pop_size"] = args.pop
    if args.generations:
        overrides["max_gen"] = args.generations
    cases, results = run_grid(config, runs=args.runs, base_seed=args.seed,
                              moo_overrides=overrides or None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_grid_outputs(out, cases, results)
    _write_manifest(out, args, {"runs": args.runs, "base_seed": args.seed,
                                "cases": [c.key for c in cases]})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="focdes",
        description="Design and stress-test load-frequency controllers by "
                    "multi-objective evolutionary search.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="plant config JSON (default: nominal)")
            p.add_argument("--set", action="append", metavar="KEY=VALUE",
                           help="override a config field (dotted path)")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="base random seed")

    p = sub.add_parser("simulate", help="simulate one controller pair")
    common(p)
    p.add_argument("--params", required=True, help="controller parameter JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="run one family/variant case")
    common(p)
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--variant", required=True, choices=VARIANTS)
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--pop", type=int, help="override population size")
    p.add_argument("--generations", type=int, help="override generation budget")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("robustness", help="tie-line sweep and random-load stress test")
    common(p)
    p.add_argument("--params", required=True, help="controller parameter JSON")
    p.add_argument("--t12-factors", default="1,2,3", dest="t12_factors")
    p.add_argument("--random-load", action="store_true", dest="random_load")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("compromise", help="select the best front and its compromise point")
    common(p, config=False)
    p.add_argument("--fronts-dir", required=True, dest="fronts_dir")
    p.add_argument("--criterion", default="min-hypervolume", choices=CRITERIA)
    p.set_defaults(func=cmd_compromise)

    p = sub.add_parser("grid", help="full families x variants protocol")
    common(p)
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--pop", type=int, help="override population size")
    p.add_argument("--generations", type=int, help="override generation budget")
    p.set_defaults(func=cmd_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
