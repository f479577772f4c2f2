"""Batch protocol: controller families x optimizer variants x seeded runs.

Each run owns its stream (seed = base_seed + run_index) and a private plant
copy, so runs are independent and may execute in parallel.  The pool size is
capped by the FOCDES_THREADS environment variable (0 or unset = one worker
per CPU, 1 = serial).
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .fractional import FopidParams, realize_controller
from .nsga2 import Bounds, MooConfig, RandomStream, run_nsga2
from .pareto import (CRITERIA, MetricReport, ParetoFront, best_compromise,
                     five_number_summary, metric_report, select_best_front)
from .plant import PlantConfig, SimTrace, evaluate_objectives, simulate

FAMILIES = ("slow", "fast", "pid")
VARIANTS = ("uniform", "logistic", "henon")

_VARIANT_KINDS = {"uniform": "uniform", "logistic": "logistic-chaotic",
                  "henon": "henon-chaotic"}

GAIN_UPPER = 10.0
ORDER_UPPER = 2.0


@dataclass
class CaseSpec:
    """One cell of the protocol grid plus its run budget and seeding."""

    controller_family: str
    optimizer_variant: str
    runs: int = 30
    base_seed: int = 0

    def __post_init__(self):
        if self.controller_family not in FAMILIES:
            raise ValueError(f"controller_family must be one of {FAMILIES}")
        if self.optimizer_variant not in VARIANTS:
            raise ValueError(f"optimizer_variant must be one of {VARIANTS}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")

    @property
    def key(self) -> str:
        return f"{self.controller_family}_{self.optimizer_variant}"


@dataclass
class RobustnessSpec:
    """Tie-line stiffness sweep plus optional random-load scenario."""

    t12_factors: list[float] = field(default_factory=lambda: [1.0, 2.0, 3.0])
    random_load: bool = False
    load_seed: int = 0

    def __post_init__(self):
        if not self.t12_factors or any(f <= 0 for f in self.t12_factors):
            raise ValueError("t12_factors must be positive")


def n_var_for(family: str) -> int:
    return 6 if family == "pid" else 10


def bounds_for_family(family: str) -> Bounds:
    """Search box: gains in [0, 10]; lambda in the family half of [0, 2]; mu in [0, 2]."""
    if family == "pid":
        return Bounds(np.zeros(6), np.full(6, GAIN_UPPER))
    lam_lo, lam_hi = (0.0, 1.0) if family == "slow" else (1.0, ORDER_UPPER)
    lower = np.array([0.0, 0.0, 0.0, lam_lo, 0.0] * 2)
    upper = np.array([GAIN_UPPER, GAIN_UPPER, GAIN_UPPER, lam_hi, ORDER_UPPER] * 2)
    return Bounds(lower, upper)


def genome_to_controllers(genome, family: str) -> tuple[FopidParams, FopidParams]:
    """Split a decision vector into the two per-area parameter sets.

    Gene order is (Kp, Ki, Kd[, lambda, mu]) for area 1 then area 2; the pid
    family carries gains only and freezes both orders at 1.
    """
    genome = np.asarray(genome, dtype=float)
    expected = n_var_for(family)
    if genome.size != expected:
        raise ValueError(f"{family} genome must have {expected} entries, got {genome.size}")
    if family == "pid":
        p1 = FopidParams(kp=genome[0], ki=genome[1], kd=genome[2], family="pid")
        p2 = FopidParams(kp=genome[3], ki=genome[4], kd=genome[5], family="pid")
    else:
        p1 = FopidParams(kp=genome[0], ki=genome[1], kd=genome[2],
                         lam=genome[3], mu=genome[4], family=family)
        p2 = FopidParams(kp=genome[5], ki=genome[6], kd=genome[7],
                         lam=genome[8], mu=genome[9], family=family)
    return p1, p2


class PlantObjectiveEvaluator:
    """genome -> (ITSE, ISDCO): realize controllers, simulate, integrate.

    Picklable so run workers can carry it across process boundaries.
    """

    def __init__(self, family: str, plant: PlantConfig):
        self.family = family
        self.plant = plant

    def __call__(self, genome) -> np.ndarray:
        p1, p2 = genome_to_controllers(genome, self.family)
        trace = simulate(self.plant, realize_controller(p1), realize_controller(p2))
        return evaluate_objectives(trace).as_array()


@dataclass
class RunResult:
    front: ParetoFront
    metrics: MetricReport
    wall_seconds: float


def _execute_run(args) -> RunResult:
    case, plant, moo, run_index, problem = args
    seed = case.base_seed + run_index
    stream = RandomStream(_VARIANT_KINDS[case.optimizer_variant], seed)
    if problem is None:
        problem = PlantObjectiveEvaluator(case.controller_family, plant)
        bounds = bounds_for_family(case.controller_family)
    else:
        problem, bounds = problem
    start = time.perf_counter()
    front = run_nsga2(problem, bounds, moo, stream)
    wall = time.perf_counter() - start
    front.provenance.run_index = run_index
    return RunResult(front=front, metrics=metric_report(front), wall_seconds=wall)


def _worker_count() -> int:
    raw = os.environ.get("FOCDES_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def run_case(case: CaseSpec, plant: PlantConfig, moo: MooConfig | None = None,
             problem=None) -> list[RunResult]:
    """Execute the case's independent seeded runs; results ordered by run index.

    ``problem`` is a test hook: a (callable, Bounds) pair replacing the plant
    evaluator, used to exercise the protocol on cheap surrogate objectives.
    """
    if moo is None:
        moo = MooConfig.for_n_var(n_var_for(case.controller_family))
    jobs = [(case, plant, moo, i, problem) for i in range(case.runs)]
    workers = min(_worker_count(), case.runs)
    if workers <= 1:
        return [_execute_run(job) for job in jobs]
    try:
        ctx = get_context("fork")
    except ValueError:
        ctx = get_context()
    with ctx.Pool(workers) as pool:
        return pool.map(_execute_run, jobs)


def robustness_sweep(best: tuple[FopidParams, FopidParams], plant: PlantConfig,
                     spec: RobustnessSpec) -> list[tuple[str, SimTrace]]:
    """One trace per tie-line factor, plus an optional seeded random-load trace.

    Diverged traces come back flagged rather than raised: losing stability
    under a stiffer tie-line is a finding, not an error.
    """
    c1 = realize_controller(best[0])
    c2 = realize_controller(best[1])
    results = []
    for factor in spec.t12_factors:
        scenario = replace(plant, t12=plant.t12 * factor)
        label = f"t12_x{factor:g}"
        results.append((label, simulate(scenario, c1, c2)))
    if spec.random_load:
        scenario = replace(
            plant,
            load1=replace(plant.load1, kind="piecewise-random", seed=spec.load_seed),
            load2=replace(plant.load2, kind="piecewise-random", seed=spec.load_seed + 1),
        )
        results.append(("random_load", simulate(scenario, c1, c2)))
    return results


def trace_verdict(trace: SimTrace, band: float = 1e-3, window: float = 10.0) -> str:
    """settled / oscillatory / diverged, judged on the last `window` seconds."""
    if trace.diverged:
        return "diverged"
    h = trace.t[1] - trace.t[0]
    n_tail = max(int(round(window / h)), 1)
    tail = max(np.max(np.abs(trace.df1[-n_tail:])), np.max(np.abs(trace.df2[-n_tail:])))
    return "settled" if tail < band else "oscillatory"


def aggregate_boxplots(reports_by_case: dict[str, list[dict]]) -> list[dict]:
    """Five-number summaries per case and metric (plus wall time)."""
    rows = []
    for case_key in sorted(reports_by_case):
        entries = reports_by_case[case_key]
        if not entries:
            raise ValueError(f"case {case_key} has no reports")
        family, variant = case_key.split("_", 1)
        for metric in ("hypervolume", "spacing", "spread", "diversity", "seconds"):
            summary = five_number_summary([e[metric] for e in entries])
            rows.append({"controller": family, "variant": variant,
                         "metric": metric, **summary})
    return rows


# ---------------------------------------------------------------------------
# results-directory layout

METRICS_HEADER = "variant,controller,run,hypervolume,spacing,spread,diversity,seconds"


def metrics_row(case: CaseSpec, run_index: int, result: RunResult) -> str:
    m = result.metrics
    return (f"{case.optimizer_variant},{case.controller_family},{run_index},"
            f"{m.hypervolume:.12g},{m.spacing:.12g},{m.spread:.12g},"
            f"{m.diversity:.12g},{result.wall_seconds:.6f}")


def write_case_outputs(out_dir: Path, case: CaseSpec, results: list[RunResult]) -> None:
    fronts_dir = out_dir / "fronts" / case.key
    fronts_dir.mkdir(parents=True, exist_ok=True)
    for i, res in enumerate(results):
        (fronts_dir / f"run{i:03d}.csv").write_text(res.front.to_csv())
        prov = res.front.provenance.to_dict()
        prov["wall_seconds"] = res.wall_seconds
        (fronts_dir / f"run{i:03d}.provenance.json").write_text(
            json.dumps(prov, indent=2) + "\n")


def write_metrics_csv(out_dir: Path, rows: list[str]) -> None:
    (out_dir / "metrics.csv").write_text(METRICS_HEADER + "\n" + "\n".join(rows) + "\n")


def write_boxplots_csv(out_dir: Path, rows: list[dict]) -> None:
    header = "controller,variant,metric,min,q1,median,q3,max"
    lines = [header]
    for r in rows:
        lines.append(f"{r['controller']},{r['variant']},{r['metric']},"
                     f"{r['min']:.12g},{r['q1']:.12g},{r['median']:.12g},"
                     f"{r['q3']:.12g},{r['max']:.12g}")
    (out_dir / "boxplots.csv").write_text("\n".join(lines) + "\n")


def compromise_entries(fronts_by_case: dict[str, list[ParetoFront]]) -> list[dict]:
    """Per family x criterion: the winning front's fuzzy-compromise solution.

    Mirrors the best-compromise table layout: for each controller family and
    each selection criterion, the best front across every variant and run is
    located, then its compromise point reported with provenance.
    """
    entries = []
    for family in FAMILIES:
        candidates: list[tuple[str, ParetoFront]] = []
        for key, fronts in fronts_by_case.items():
            if key.startswith(family + "_"):
                variant = key.split("_", 1)[1]
                candidates.extend((variant, f) for f in fronts)
        if not candidates:
            continue
        for criterion in CRITERIA:
            best_front = select_best_front([f for _, f in candidates], criterion)
            variant = next(v for v, f in candidates if f is best_front)
            idx = best_compromise(best_front)
            entries.append({
                "controller": family,
                "criterion": criterion,
                "variant": variant,
                "run": best_front.provenance.run_index,
                "seed": best_front.provenance.seed,
                "genome": [float(v) for v in best_front.genomes[idx]],
                "itse": float(best_front.objectives[idx, 0]),
                "isdco": float(best_front.objectives[idx, 1]),
            })
    return entries


def run_grid(plant: PlantConfig, families=FAMILIES, variants=VARIANTS, runs: int = 30,
             base_seed: int = 0, moo_overrides: dict | None = None):
    """The full protocol: every family x variant case, `runs` runs each.

    Returns (cases, results_by_case).  Deterministic for a fixed base seed:
    case ordering is fixed and each run reseeds from base_seed + run_index.
    """
    cases = [CaseSpec(f, v, runs=runs, base_seed=base_seed)
             for f in families for v in variants]
    results_by_case = {}
    for case in cases:
        moo = MooConfig.for_n_var(n_var_for(case.controller_family),
                                  **(moo_overrides or {}))
        results_by_case[case.key] = run_case(case, plant, moo)
    return cases, results_by_case


def write_grid_outputs(out_dir: Path, cases: list[CaseSpec],
                       results_by_case: dict[str, list[RunResult]]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    metric_rows = []
    reports_by_case: dict[str, list[dict]] = {}
    fronts_by_case: dict[str, list[ParetoFront]] = {}
    for case in cases:
        results = results_by_case[case.key]
        write_case_outputs(out_dir, case, results)
        for i, res in enumerate(results):
            metric_rows.append(metrics_row(case, i, res))
        reports_by_case[case.key] = [
            {"hypervolume": r.metrics.hypervolume, "spacing": r.metrics.spacing,
             "spread": r.metrics.spread, "diversity": r.metrics.diversity,
             "seconds": r.wall_seconds} for r in results]
        fronts_by_case[case.key] = [r.front for r in results]
    write_metrics_csv(out_dir, metric_rows)
    write_boxplots_csv(out_dir, aggregate_boxplots(reports_by_case))
    entries = compromise_entries(fronts_by_case)
    (out_dir / "compromise.json").write_text(json.dumps(entries, indent=2) + "\n")
