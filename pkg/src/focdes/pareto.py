"""Pareto front containers, quality metrics, and fuzzy compromise selection.

All metrics treat both objectives as minimization targets.  The hypervolume
here is measured toward the origin (area of the region the front dominates
from below), so smaller is better; spacing is smaller-better, spread and
diversity larger-better.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, asdict

import numpy as np

CRITERIA = ("min-hypervolume", "max-diversity", "max-spread", "min-spacing")


@dataclass
class RunProvenance:
    """Where a front came from: stream variant, seed, run index, budget used."""

    variant: str = "uniform"
    seed: int = 0
    run_index: int = 0
    generations: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ParetoFront:
    """Mutually non-dominated (genome, objective) pairs plus provenance."""

    genomes: np.ndarray       # (S, n_var)
    objectives: np.ndarray    # (S, m)
    provenance: RunProvenance = field(default_factory=RunProvenance)
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.genomes = np.atleast_2d(np.asarray(self.genomes, dtype=float))
        self.objectives = np.atleast_2d(np.asarray(self.objectives, dtype=float))
        if self.genomes.shape[0] != self.objectives.shape[0]:
            raise ValueError("genomes and objectives must have equal row counts")
        if self.objectives.shape[0] == 0:
            raise ValueError("a Pareto front cannot be empty")

    @property
    def size(self) -> int:
        return self.objectives.shape[0]

    def to_csv(self) -> str:
        n_var = self.genomes.shape[1]
        m = self.objectives.shape[1]
        header = [f"genome_{i}" for i in range(n_var)] + [f"j{i + 1}" for i in range(m)]
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for g, o in zip(self.genomes, self.objectives):
            buf.write(",".join(format(v, ".12g") for v in list(g) + list(o)) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, provenance: RunProvenance | None = None) -> "ParetoFront":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if not lines:
            raise ValueError("empty front CSV")
        header = lines[0].split(",")
        n_var = sum(1 for h in header if h.startswith("genome_"))
        m = len(header) - n_var
        if n_var == 0 or m == 0:
            raise ValueError("front CSV header must contain genome_* and j* columns")
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        return cls(genomes=data[:, :n_var], objectives=data[:, n_var:],
                   provenance=provenance or RunProvenance())


@dataclass
class MetricReport:
    """The four front-quality numbers for one run."""

    hypervolume: float   # minimize
    spacing: float       # minimize
    spread: float        # maximize
    diversity: float     # maximize


def _as_points(front) -> np.ndarray:
    if isinstance(front, ParetoFront):
        return front.objectives
    pts = np.atleast_2d(np.asarray(front, dtype=float))
    return pts


def hypervolume_to_origin(front, literal: bool = False) -> float:
    """Area of the union of axis rectangles [0, x_i] x [0, y_i]; smaller is better.

    Sorts by x ascending, prunes dominated points so y descends strictly, and
    sweeps sum((x_i - x_{i-1}) * y_i) anchored at x_0 = 0.  ``literal=True``
    instead evaluates the printed product form
    sum((x_i - x_{i-1}) * (y_i - y_{i-1})) on the same pruned staircase
    (anchored at the axes) for comparison; the sweep is the canonical value.
    """
    pts = _as_points(front)
    if pts.shape[0] == 0:
        raise ValueError("front is empty")
    if pts.shape[1] != 2:
        raise ValueError("hypervolume_to_origin is defined for 2-D fronts")
    if np.any(pts <= 0):
        raise ValueError("all coordinates must be > 0")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    staircase: list[tuple[float, float]] = []
    for x, y in pts[order]:
        # sorted by x ascending (y ascending within ties), so a point is
        # dominated exactly when its y does not improve on the last kept one
        if staircase and y >= staircase[-1][1]:
            continue
        staircase.append((float(x), float(y)))
    total = 0.0
    x_prev = 0.0
    y_prev = 0.0
    for x, y in staircase:
        if literal:
            total += (x - x_prev) * (y - y_prev)
        else:
            total += (x - x_prev) * y
        x_prev, y_prev = x, y
    return abs(total) if literal else total


def spacing_metric(front) -> float:
    """Std deviation of nearest-neighbor Manhattan distances; 0 means even spacing."""
    pts = _as_points(front)
    s = pts.shape[0]
    if s < 2:
        raise ValueError("spacing needs at least two points")
    d = np.empty(s)
    for i in range(s):
        diffs = np.sum(np.abs(pts - pts[i]), axis=1)
        diffs[i] = np.inf
        d[i] = diffs.min()
    mean = d.mean()
    return float(math.sqrt(np.sum((mean - d) ** 2) / (s - 1)))


def pareto_spread(front) -> float:
    """Euclidean distance between the endpoints of the x-sorted front."""
    pts = _as_points(front)
    if pts.shape[1] != 2:
        raise ValueError("pareto_spread is defined for 2-D fronts")
    if pts.shape[0] < 2:
        return 0.0
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    lo, hi = pts[order[0]], pts[order[-1]]
    return float(np.hypot(hi[0] - lo[0], hi[1] - lo[1]))


def diversity_metric(front) -> float:
    """Moment of inertia about the centroid: sum of squared deviations."""
    pts = _as_points(front)
    centroid = pts.mean(axis=0)
    return float(np.sum((pts - centroid) ** 2))


def fuzzy_membership(f: float, f_min: float, f_max: float) -> float:
    """Linear satisfaction degree: 1 at/below f_min, 0 at/above f_max."""
    if f_min > f_max:
        raise ValueError("f_min must be <= f_max")
    if f_min == f_max:
        return 1.0
    if f <= f_min:
        return 1.0
    if f >= f_max:
        return 0.0
    return (f_max - f) / (f_max - f_min)


def best_compromise(front) -> int:
    """Index of the solution with the largest normalized membership sum.

    Ties break toward the lower first objective, then the lower index, so the
    selection is deterministic.
    """
    pts = _as_points(front)
    s, m = pts.shape
    if s == 0:
        raise ValueError("front is empty")
    mins = pts.min(axis=0)
    maxs = pts.max(axis=0)
    memberships = np.empty((s, m))
    for k in range(s):
        for i in range(m):
            memberships[k, i] = fuzzy_membership(pts[k, i], mins[i], maxs[i])
    sums = memberships.sum(axis=1)
    total = sums.sum()
    scores = sums / total if total > 0 else np.full(s, 1.0 / s)
    best = 0
    for k in range(1, s):
        if scores[k] > scores[best] + 1e-15:
            best = k
        elif abs(scores[k] - scores[best]) <= 1e-15 and pts[k, 0] < pts[best, 0]:
            best = k
    return best


def metric_report(front) -> MetricReport:
    """All four metrics for one front (singleton spacing reported as 0)."""
    pts = _as_points(front)
    try:
        spacing = spacing_metric(pts)
    except ValueError:
        spacing = 0.0
    return MetricReport(
        hypervolume=hypervolume_to_origin(pts),
        spacing=spacing,
        spread=pareto_spread(pts),
        diversity=diversity_metric(pts),
    )


def _criterion_value(front, criterion: str) -> float:
    pts = _as_points(front)
    if criterion == "min-hypervolume":
        return hypervolume_to_origin(pts)
    if criterion == "max-diversity":
        return -diversity_metric(pts)
    if criterion == "max-spread":
        return -pareto_spread(pts)
    if criterion == "min-spacing":
        try:
            return spacing_metric(pts)
        except ValueError:
            return math.inf   # a singleton front can never win on spacing
    raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")


def select_best_front(fronts: list[ParetoFront], criterion: str) -> ParetoFront:
    """The optimal front under the criterion; ties go to the earliest run."""
    if not fronts:
        raise ValueError("no fronts to select from")
    keyed = [(_criterion_value(f, criterion), f.provenance.run_index, i)
             for i, f in enumerate(fronts)]
    _, _, best = min(keyed)
    return fronts[best]


def five_number_summary(values) -> dict[str, float]:
    """Min, quartiles (linear interpolation), max; the box-plot convention."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("no values")
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return {"min": float(arr.min()), "q1": float(q1), "median": float(med),
            "q3": float(q3), "max": float(arr.max())}
