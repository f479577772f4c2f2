"""Nonlinear two-area load-frequency-control loop and its two design objectives.

Per-area signal flow: the area control error drives the controller, whose
output (with the feedback minus sign) joins the droop speed-error, passes the
governor dead-band, then governor lag, reheater lead-lag, rate-limited
turbine lag, and the power-system lag producing the frequency deviation.
Areas couple through an integrating tie-line.  The conflicting objectives are
the time-weighted squared area-control-error integral and the squared
controller-output integral.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import _kernel
from .fractional import RealizedController, controller_state_space
from .lti_sim import SolverConfig

#: objective pair reported for diverged traces; strictly dominated by any
#: finite solution, so unstable genomes are purged by non-dominated sorting
DIVERGENCE_PENALTY = (1e6, 1e6)

TRACE_HEADER = "t,df1,df2,dptie,ace1,ace2,u1,u2"


@dataclass
class AreaParams:
    """One area's plant constants (power-system, droop, governor, turbine)."""

    k_ps: float = 120.0      # Hz/pu
    t_ps: float = 20.0       # s
    r: float = 2.4           # Hz/pu-MW droop
    b: float = 0.425         # pu-MW/Hz frequency bias
    t_g: float = 0.1         # s governor
    t_t: float = 0.3         # s turbine
    t_r: float = 10.0        # s reheater
    k_r: float = 0.5         # reheater gain
    grc_delta: float | None = 0.005   # pu/s, None disables the rate constraint
    dead_band_half: float = 0.0003    # pu, 0 disables the dead-band

    def __post_init__(self):
        for name in ("t_ps", "t_g", "t_t", "t_r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if not self.k_ps > 0:
            raise ValueError("k_ps must be > 0")
        if not self.r > 0:
            raise ValueError("r must be > 0")
        if not self.b > 0:
            raise ValueError("b must be > 0")
        if not 0.0 <= self.k_r <= 1.0:
            raise ValueError("k_r must lie in [0, 1]")
        if self.grc_delta is not None and not self.grc_delta > 0:
            raise ValueError("grc_delta must be > 0 or None")
        if self.dead_band_half < 0:
            raise ValueError("dead_band_half must be >= 0")


@dataclass
class LoadProfile:
    """Load disturbance: a step, or a seeded piecewise-constant random pattern."""

    kind: str = "step"
    amplitude: float = 0.0
    start_time: float = 0.0
    segment_length: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("step", "piecewise-random"):
            raise ValueError("kind must be 'step' or 'piecewise-random'")
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.kind == "piecewise-random" and not self.segment_length > 0:
            raise ValueError("segment_length must be > 0")

    def sample(self, solver: SolverConfig) -> np.ndarray:
        """Per-sample load values over the horizon (held ZOH within each step)."""
        t = solver.time_vector()
        if self.kind == "step":
            return np.where(t >= self.start_time, self.amplitude, 0.0)
        rng = np.random.default_rng(self.seed)
        n_seg = int(math.ceil((solver.horizon_t - self.start_time)
                              / self.segment_length)) + 1
        levels = rng.uniform(0.0, self.amplitude, size=max(n_seg, 1))
        out = np.zeros_like(t)
        active = t >= self.start_time
        seg = np.floor((t[active] - self.start_time) / self.segment_length).astype(int)
        out[active] = levels[np.clip(seg, 0, n_seg - 1)]
        return out


@dataclass
class PlantConfig:
    """Both areas, the tie-line coupling, load disturbances and solver settings."""

    area1: AreaParams = field(default_factory=AreaParams)
    area2: AreaParams = field(default_factory=AreaParams)
    t12: float = 0.0707      # pu/rad synchronizing coefficient
    a12: float = -1.0        # area-capacity ratio factor (equal areas)
    load1: LoadProfile = field(default_factory=lambda: LoadProfile("step", 0.02))
    load2: LoadProfile = field(default_factory=lambda: LoadProfile("step", 0.008))
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not self.t12 > 0:
            raise ValueError("t12 must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "PlantConfig":
        try:
            return cls(
                area1=AreaParams(**data.get("area1", {})),
                area2=AreaParams(**data.get("area2", {})),
                t12=float(data.get("t12", 0.0707)),
                a12=float(data.get("a12", -1.0)),
                load1=LoadProfile(**data.get("load1", {"kind": "step", "amplitude": 0.02})),
                load2=LoadProfile(**data.get("load2", {"kind": "step", "amplitude": 0.008})),
                solver=SolverConfig(**data.get("solver", {})),
            )
        except TypeError as exc:
            raise ValueError(f"bad plant config field: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "PlantConfig":
        return cls.from_dict(json.loads(text))


def nominal_config() -> PlantConfig:
    """The nominal two-area setup: standard data, 0.02/0.008 pu step loads."""
    return PlantConfig()


def linear_config() -> PlantConfig:
    """Nominal setup with dead-band and rate constraint disabled (pure linear)."""
    cfg = PlantConfig()
    for area in (cfg.area1, cfg.area2):
        area.grc_delta = None
        area.dead_band_half = 0.0
    return cfg


@dataclass
class SimTrace:
    """Sampled closed-loop trajectory of both areas."""

    t: np.ndarray
    df1: np.ndarray
    df2: np.ndarray
    dptie: np.ndarray
    ace1: np.ndarray
    ace2: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    diverged: bool = False
    divergence_time: float | None = None

    def channels(self) -> dict[str, np.ndarray]:
        return {"t": self.t, "df1": self.df1, "df2": self.df2, "dptie": self.dptie,
                "ace1": self.ace1, "ace2": self.ace2, "u1": self.u1, "u2": self.u2}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(TRACE_HEADER + "\n")
        cols = np.column_stack([self.t, self.df1, self.df2, self.dptie,
                                self.ace1, self.ace2, self.u1, self.u2])
        for row in cols:
            buf.write(",".join(format(v, ".12g") for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SimTrace":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if not lines or lines[0].strip() != TRACE_HEADER:
            raise ValueError(f"trace CSV must start with header '{TRACE_HEADER}'")
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        if data.shape[1] != 8:
            raise ValueError("trace CSV must have 8 columns")
        diverged = bool(np.isnan(data[:, 1]).any())
        dtime = None
        if diverged:
            dtime = float(data[np.isnan(data[:, 1]).argmax(), 0])
        return cls(*(data[:, i] for i in range(8)), diverged=diverged,
                   divergence_time=dtime)


def frequency_bias(r: float, d: float) -> float:
    """Bias factor from droop and damping: 1/r + d."""
    if not r > 0:
        raise ValueError("r must be > 0")
    if d < 0:
        raise ValueError("d must be >= 0")
    return 1.0 / r + d


def compute_ace(dptie: float, df: float, b: float) -> float:
    """Area control error: tie-line deviation plus bias-weighted frequency error."""
    return dptie + b * df


def _area_param_block(area: AreaParams) -> list[float]:
    grc = area.grc_delta if area.grc_delta is not None else -1.0
    return [area.t_g, area.t_t, area.t_r, area.k_r, area.k_ps, area.t_ps,
            area.r, area.b, area.dead_band_half, grc]


def simulate(config: PlantConfig, ctrl1: RealizedController,
             ctrl2: RealizedController) -> SimTrace:
    """Integrate the closed loop over the horizon; pure function of its arguments.

    Controller state is not shared: the filter matrices are collapsed into a
    fresh zero-state realization, so the passed controllers are never mutated
    and repeated calls are independent.
    """
    a1, b1, c1, d1 = controller_state_space(ctrl1)
    a2, b2, c2, d2 = controller_state_space(ctrl2)
    p = np.array(_area_param_block(config.area1) + _area_param_block(config.area2)
                 + [2.0 * math.pi * config.t12, config.a12])

    solver = config.solver
    n = solver.n_steps
    loads1 = np.ascontiguousarray(config.load1.sample(solver))
    loads2 = np.ascontiguousarray(config.load2.sample(solver))

    outs = [np.full(n + 1, np.nan) for _ in range(7)]
    with np.errstate(over="ignore", invalid="ignore"):
        diverged_at = _kernel.simulate_kernel(
            solver.step_h, n,
            np.ascontiguousarray(a1), np.ascontiguousarray(b1),
            np.ascontiguousarray(c1), d1,
            np.ascontiguousarray(a2), np.ascontiguousarray(b2),
            np.ascontiguousarray(c2), d2,
            p, loads1, loads2, *outs)

    t = solver.time_vector()
    trace = SimTrace(t, *outs)
    if diverged_at >= 0:
        trace.diverged = True
        trace.divergence_time = float(diverged_at * solver.step_h)
        for arr in outs:
            arr[diverged_at:] = np.nan
    return trace


@dataclass
class ObjectiveVector:
    """The two minimization objectives summed over both areas."""

    j1_itse: float
    j2_isdco: float

    def as_array(self) -> np.ndarray:
        return np.array([self.j1_itse, self.j2_isdco])


def evaluate_objectives(trace: SimTrace) -> ObjectiveVector:
    """Trapezoid-rule ITSE and ISDCO over the sampled trace.

    Diverged traces score the penalty sentinel so the optimizer discards them
    through plain non-dominated sorting.
    """
    if trace.diverged:
        return ObjectiveVector(*DIVERGENCE_PENALTY)
    t = trace.t
    j1 = float(np.trapezoid(t * trace.ace1 ** 2, t) + np.trapezoid(t * trace.ace2 ** 2, t))
    j2 = float(np.trapezoid(trace.u1 ** 2, t) + np.trapezoid(trace.u2 ** 2, t))
    if not (np.isfinite(j1) and np.isfinite(j2)):
        return ObjectiveVector(*DIVERGENCE_PENALTY)
    return ObjectiveVector(j1, j2)
