"""Elitist multi-objective genetic engine with pluggable random streams.

The random stream is either a seeded uniform generator or a chaotic variant
(logistic or Henon orbit multiplied by a uniform draw).  All stochastic
decisions of a run are drawn from that single stream in a fixed order, so a
(kind, seed) pair pins the whole run bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pareto import ParetoFront, RunProvenance

LOGISTIC_A = 4.0
HENON_A = 1.4
HENON_B = 0.3
HENON_SCALE_LO = -1.5   # attractor extent mapped onto [0, 1]
HENON_SCALE_HI = 1.5
HENON_ESCAPE = 10.0
CROSSOVER_RATIO_LO = -0.25   # intermediate-recombination ratio range
CROSSOVER_RATIO_HI = 1.25

STREAM_KINDS = ("uniform", "logistic-chaotic", "henon-chaotic")


@dataclass
class Bounds:
    """Box constraints of the decision space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower/upper must be 1-D arrays of equal length")
        if not np.all(self.lower < self.upper):
            raise ValueError("need lower[i] < upper[i] for all i")

    @property
    def n_var(self) -> int:
        return self.lower.size

    def clamp(self, genome: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(genome, self.lower), self.upper)


@dataclass
class Individual:
    genome: np.ndarray
    objectives: np.ndarray | None = None
    rank: int = 0            # 1-based front index after sorting
    crowding: float = 0.0


def logistic_next(x: float, a: float = LOGISTIC_A) -> float:
    """One step of the logistic recurrence x -> a x (1 - x)."""
    return a * x * (1.0 - x)


def henon_next(x: float, y: float, a: float = HENON_A, b: float = HENON_B) -> tuple[float, float]:
    """One step of the Henon map (x, y) -> (y + 1 - a x^2, b x)."""
    return y + 1.0 - a * x * x, b * x


class RandomStream:
    """Draws in [0, 1]: uniform, or chaotic-map value times a uniform draw.

    Chaotic values are taken from the logistic orbit (already in [0, 1]) or
    from the Henon x-coordinate affinely mapped from [-1.5, 1.5] and clamped.
    Map seeds derive from the stream's own uniform generator, so a
    (kind, seed) pair reproduces the sequence exactly.
    """

    def __init__(self, kind: str, seed: int):
        if kind not in STREAM_KINDS:
            raise ValueError(f"kind must be one of {STREAM_KINDS}, got {kind!r}")
        self.kind = kind
        self.uniform_seed = int(seed)
        self.rng = np.random.Generator(np.random.PCG64(self.uniform_seed))
        if kind == "logistic-chaotic":
            self._x = self._draw_logistic_seed()
        elif kind == "henon-chaotic":
            self._x = 0.1 * self.rng.random()
            self._y = 0.1 * self.rng.random()
            for _ in range(20):   # burn-in onto the attractor
                self._henon_step()

    def _draw_logistic_seed(self) -> float:
        # avoid fixed points / short cycles of the a=4 orbit
        while True:
            x = self.rng.uniform(0.01, 0.99)
            if all(abs(x - bad) > 1e-3 for bad in (0.25, 0.5, 0.75)):
                return x

    def _henon_step(self) -> None:
        self._x, self._y = henon_next(self._x, self._y)
        if abs(self._x) > HENON_ESCAPE:
            # left the basin: reseed near the origin from the uniform stream
            self._x = 0.1 * self.rng.random()
            self._y = 0.1 * self.rng.random()

    def next(self) -> float:
        if self.kind == "uniform":
            return float(self.rng.random())
        if self.kind == "logistic-chaotic":
            self._x = logistic_next(self._x)
            chaotic = self._x
        else:
            self._henon_step()
            span = HENON_SCALE_HI - HENON_SCALE_LO
            chaotic = (self._x - HENON_SCALE_LO) / span
            chaotic = min(max(chaotic, 0.0), 1.0)
        return chaotic * float(self.rng.random())

    def normal(self) -> float:
        """Standard-normal deviate via Box-Muller on two stream draws."""
        u1 = max(self.next(), 1e-300)
        u2 = self.next()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def stream_next(rs: RandomStream) -> float:
    """Next value of the stream, always in [0, 1]."""
    return rs.next()


@dataclass
class MooConfig:
    """Optimizer hyperparameters (defaults follow the 15x/200x n_var sizing)."""

    pop_size: int = 60
    max_gen: int = 100
    func_tol: float = 1e-6
    crossover_fraction: float = 0.8
    mutation_fraction: float = 0.2
    tournament_size: int = 2
    pareto_fraction: float = 0.7
    sigma_initial: float = 0.1   # Gaussian mutation scale, fraction of range
    sigma_final: float = 0.01    # linearly reached at max_gen
    stall_window: int = 50       # generations of sub-tolerance change to stop

    def __post_init__(self):
        if self.pop_size < 4 or self.pop_size % 2:
            raise ValueError("pop_size must be even and >= 4")
        if self.max_gen < 1:
            raise ValueError("max_gen must be >= 1")
        for name in ("crossover_fraction", "mutation_fraction", "pareto_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")

    @classmethod
    def for_n_var(cls, n_var: int, **overrides) -> "MooConfig":
        pop = 15 * n_var
        if pop % 2:
            pop += 1
        defaults = dict(pop_size=pop, max_gen=200 * n_var)
        defaults.update(overrides)
        return cls(**defaults)


def dominates(u, v) -> bool:
    """Weak Pareto dominance: u <= v everywhere and strictly better somewhere."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("objective vectors must have equal length")
    return bool(np.all(u <= v) and np.any(u < v))


def non_dominated_sort(objectives) -> list[list[int]]:
    """Partition indices into successive non-dominated fronts (fast sort).

    The pairwise dominance matrix is built by broadcasting, then fronts are
    peeled off by repeatedly zeroing dominator counts.
    """
    objs = np.asarray(objectives, dtype=float)
    if objs.ndim != 2 or objs.shape[0] == 0:
        raise ValueError("objectives must be a non-empty (N, m) array")
    le = np.all(objs[:, None, :] <= objs[None, :, :], axis=2)
    ge = np.all(objs[:, None, :] >= objs[None, :, :], axis=2)
    dom = le & ~ge                      # dom[i, j]: i dominates j
    n_dominators = dom.sum(axis=0).astype(np.int64)
    fronts: list[list[int]] = []
    current = np.flatnonzero(n_dominators == 0)
    while current.size:
        fronts.append(current.tolist())
        n_dominators = n_dominators - dom[current].sum(axis=0)
        n_dominators[current] = -1      # processed, never re-selected
        current = np.flatnonzero(n_dominators == 0)
    return fronts


def crowding_distance(front_objectives) -> list[float]:
    """NSGA-II crowding: boundary points get inf, interior the normalized span."""
    objs = np.asarray(front_objectives, dtype=float)
    if objs.ndim != 2 or objs.shape[0] == 0:
        raise ValueError("front must be a non-empty (S, m) array")
    s, m = objs.shape
    dist = np.zeros(s)
    for k in range(m):
        order = np.argsort(objs[:, k], kind="stable")
        lo = objs[order[0], k]
        hi = objs[order[-1], k]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if hi == lo:
            continue   # degenerate span contributes nothing
        for idx in range(1, s - 1):
            i = order[idx]
            if np.isinf(dist[i]):
                continue
            dist[i] += (objs[order[idx + 1], k] - objs[order[idx - 1], k]) / (hi - lo)
    return dist.tolist()


class EvaluationError(RuntimeError):
    """Objective evaluator raised; carries the offending genome."""

    def __init__(self, genome: np.ndarray, cause: Exception):
        self.genome = np.asarray(genome)
        super().__init__(f"objective evaluation failed for genome {self.genome.tolist()}: {cause}")


def _evaluate(problem, genome: np.ndarray) -> np.ndarray:
    try:
        objs = np.asarray(problem(genome), dtype=float)
    except Exception as exc:   # noqa: BLE001 - re-raised with genome attached
        raise EvaluationError(genome, exc) from exc
    return objs


def _assign_fronts(pop: list[Individual]) -> list[list[int]]:
    fronts = non_dominated_sort([ind.objectives for ind in pop])
    for rank, front in enumerate(fronts, start=1):
        dists = crowding_distance([pop[i].objectives for i in front])
        for i, d in zip(front, dists):
            pop[i].rank = rank
            pop[i].crowding = d
    return fronts


def _tournament(pop: list[Individual], stream: RandomStream, size: int) -> Individual:
    best = None
    for _ in range(size):
        idx = min(int(stream.next() * len(pop)), len(pop) - 1)
        cand = pop[idx]
        if best is None:
            best = cand
            continue
        if cand.rank < best.rank:
            best = cand
        elif cand.rank == best.rank:
            if cand.crowding > best.crowding:
                best = cand
            elif cand.crowding == best.crowding and stream.next() < 0.5:
                best = cand
    return best


def run_nsga2(problem, bounds: Bounds, config: MooConfig, stream: RandomStream,
              record_history: bool = False) -> ParetoFront:
    """Full elitist loop; returns the crowding-truncated first front.

    Each generation draws every stochastic decision from the stream before
    evaluations, produces pop_size offspring (a crossover_fraction share by
    intermediate recombination, the rest by Gaussian mutation with linearly
    shrinking sigma), merges with the parents and survivor-selects by
    (rank, crowding).  Terminates early once the mean first-front objective
    vector changes less than func_tol for stall_window generations.
    """
    n_var = bounds.n_var
    span = bounds.upper - bounds.lower
    pop_size = config.pop_size

    pop: list[Individual] = []
    for _ in range(pop_size):
        genome = bounds.lower + span * np.array([stream.next() for _ in range(n_var)])
        pop.append(Individual(genome, _evaluate(problem, genome)))
    fronts = _assign_fronts(pop)

    history: list[dict] = []
    n_cross = int(round(config.crossover_fraction * pop_size))
    prev_mean = None
    stall = 0
    generations = 0

    for gen in range(1, config.max_gen + 1):
        frac = gen / config.max_gen
        sigma_scale = config.sigma_initial + (config.sigma_final - config.sigma_initial) * frac

        children: list[np.ndarray] = []
        for _ in range(n_cross):
            pa = _tournament(pop, stream, config.tournament_size)
            pb = _tournament(pop, stream, config.tournament_size)
            ratios = np.array([CROSSOVER_RATIO_LO
                               + (CROSSOVER_RATIO_HI - CROSSOVER_RATIO_LO) * stream.next()
                               for _ in range(n_var)])
            child = pa.genome + ratios * (pb.genome - pa.genome)
            children.append(bounds.clamp(child))
        for _ in range(pop_size - n_cross):
            parent = _tournament(pop, stream, config.tournament_size)
            noise = np.array([stream.normal() for _ in range(n_var)])
            child = parent.genome + sigma_scale * span * noise
            children.append(bounds.clamp(child))

        offspring = [Individual(g, _evaluate(problem, g)) for g in children]
        merged = pop + offspring
        fronts = _assign_fronts(merged)

        survivors: list[Individual] = []
        for front in fronts:
            if len(survivors) + len(front) <= pop_size:
                survivors.extend(merged[i] for i in front)
            else:
                room = pop_size - len(survivors)
                by_crowding = sorted(front, key=lambda i: (-merged[i].crowding, i))
                survivors.extend(merged[i] for i in by_crowding[:room])
            if len(survivors) == pop_size:
                break
        pop = survivors
        fronts = _assign_fronts(pop)
        generations = gen

        first = np.array([pop[i].objectives for i in fronts[0]])
        mean = first.mean(axis=0)
        if record_history:
            history.append({"generation": gen, "first_front": first.copy(),
                            "genome_min": min(ind.genome.min() for ind in pop),
                            "genome_max": max(ind.genome.max() for ind in pop)})
        if prev_mean is not None and np.max(np.abs(mean - prev_mean)) < config.func_tol:
            stall += 1
            if stall >= config.stall_window:
                break
        else:
            stall = 0
        prev_mean = mean

    first_front = [pop[i] for i in fronts[0]]
    keep = math.ceil(config.pareto_fraction * pop_size)
    order = sorted(range(len(first_front)),
                   key=lambda i: (-first_front[i].crowding, i))[:keep]
    chosen = [first_front[i] for i in sorted(order)]
    provenance = RunProvenance(variant=stream.kind, seed=stream.uniform_seed,
                               generations=generations)
    front = ParetoFront(
        genomes=np.array([ind.genome for ind in chosen]),
        objectives=np.array([ind.objectives for ind in chosen]),
        provenance=provenance,
    )
    if record_history:
        front.history = history
    return front
