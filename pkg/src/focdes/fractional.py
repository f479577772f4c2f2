"""Band-limited fractional differ-integrators and FOPID controller assembly.

A fractional power of s is approximated over a frequency band by a recursive
pole/zero ladder (Oustaloup's method).  Complete controllers
C(s) = kp + ki/s^lam + kd*s^mu are realized as two filter branches sharing
one error input plus a static proportional path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .lti_sim import LtiSystem, SimulationDiverged, from_transfer_function, series, step_lti

DEFAULT_OMEGA_B = 1e-2
DEFAULT_OMEGA_H = 1e2
DEFAULT_N_HALF = 2

FAMILIES = ("slow", "fast", "pid")


@dataclass
class OustaloupSpec:
    """Order and fitting band of one rational fractional-power filter."""

    alpha: float
    omega_b: float = DEFAULT_OMEGA_B
    omega_h: float = DEFAULT_OMEGA_H
    n_half: int = DEFAULT_N_HALF

    def __post_init__(self):
        if not 0 < self.omega_b < self.omega_h:
            raise ValueError("need 0 < omega_b < omega_h")
        if self.n_half < 1:
            raise ValueError("n_half must be >= 1")
        if abs(self.alpha) > 1:
            raise ValueError("|alpha| must be <= 1; decompose larger orders first")


@dataclass
class FopidParams:
    """Controller gains plus fractional integral/derivative orders.

    family 'pid' freezes lam = mu = 1; 'slow' keeps lam in [0, 1] and
    'fast' keeps lam in [1, 2].  Gains are non-negative (the loop applies
    the feedback minus sign).
    """

    kp: float
    ki: float
    kd: float
    lam: float = 1.0
    mu: float = 1.0
    family: str = "pid"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        for name in ("kp", "ki", "kd"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not (0.0 <= self.lam <= 2.0 and 0.0 <= self.mu <= 2.0):
            raise ValueError("lambda and mu must lie in [0, 2]")
        if self.family == "pid":
            if self.lam != 1.0 or self.mu != 1.0:
                raise ValueError("family 'pid' requires lambda = mu = 1")
        elif self.family == "slow":
            if self.lam > 1.0:
                raise ValueError("family 'slow' requires lambda in [0, 1]")
        else:
            if self.lam < 1.0:
                raise ValueError("family 'fast' requires lambda in [1, 2]")

    def to_json(self) -> str:
        return json.dumps({"kp": self.kp, "ki": self.ki, "kd": self.kd,
                           "lambda": self.lam, "mu": self.mu, "family": self.family})

    @classmethod
    def from_dict(cls, data: dict) -> "FopidParams":
        try:
            return cls(kp=float(data["kp"]), ki=float(data["ki"]), kd=float(data["kd"]),
                       lam=float(data.get("lambda", 1.0)), mu=float(data.get("mu", 1.0)),
                       family=str(data.get("family", "pid")))
        except KeyError as exc:
            raise ValueError(f"missing controller field: {exc.args[0]}") from exc

    @classmethod
    def from_json(cls, text: str) -> "FopidParams":
        return cls.from_dict(json.loads(text))


def oustaloup(spec: OustaloupSpec) -> LtiSystem:
    """Rational approximation of s^alpha over [omega_b, omega_h].

    Zeros, poles and gain follow the recursive ladder
        w_k  = wb * (wh/wb)^((k + N + (1+alpha)/2) / (2N+1))
        w'_k = wb * (wh/wb)^((k + N + (1-alpha)/2) / (2N+1))
        K    = wh^alpha
    giving a stable, minimum-phase filter of order 2N+1.
    """
    n, wb, wh, alpha = spec.n_half, spec.omega_b, spec.omega_h, spec.alpha
    ratio = wh / wb
    order = 2 * n + 1
    ks = wh ** alpha
    poles = np.empty(order)
    zeros = np.empty(order)
    for k in range(-n, n + 1):
        poles[k + n] = wb * ratio ** ((k + n + 0.5 * (1 + alpha)) / order)
        zeros[k + n] = wb * ratio ** ((k + n + 0.5 * (1 - alpha)) / order)
    num = ks * np.poly(-zeros)
    den = np.poly(-poles)
    return from_transfer_function(num, den)


def decompose_order(alpha: float) -> tuple[int, float]:
    """Split alpha in (-2, 2) into truncated integer part and fractional remainder."""
    if not abs(alpha) < 2:
        raise ValueError("|alpha| must be < 2")
    integer = math.trunc(alpha)
    return integer, alpha - integer


def _static_gain(value: float) -> LtiSystem:
    return LtiSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                     np.array([[value]]))


def _integrator() -> LtiSystem:
    return LtiSystem([[0.0]], [[1.0]], [[1.0]], [[0.0]])


def _band_limited_derivative(omega_h: float) -> LtiSystem:
    # s/(1 + s/wh): proper stand-in for a pure differentiator, corner at wh
    return from_transfer_function([1.0, 0.0], [1.0 / omega_h, 1.0])


def _scale_output(sys: LtiSystem, gain: float) -> LtiSystem:
    return LtiSystem(sys.a, sys.b, gain * sys.c, gain * sys.d)


@dataclass
class RealizedController:
    """Runnable FOPID: proportional path plus integral/derivative filter branches.

    Output for error e is kp*e + integral_branch(e) + derivative_branch(e).
    Carries filter state; clone before parallel use.
    """

    integral_branch: LtiSystem
    derivative_branch: LtiSystem
    kp: float

    def copy(self) -> "RealizedController":
        return RealizedController(self.integral_branch.copy(),
                                  self.derivative_branch.copy(), self.kp)

    def reset(self) -> None:
        self.integral_branch.reset()
        self.derivative_branch.reset()

    @property
    def order(self) -> int:
        return self.integral_branch.order + self.derivative_branch.order


def realize_controller(params: FopidParams,
                       omega_b: float = DEFAULT_OMEGA_B,
                       omega_h: float = DEFAULT_OMEGA_H,
                       n_half: int = DEFAULT_N_HALF) -> RealizedController:
    """Build the two filter branches of a FOPID controller.

    Integral branch: ki/s^lam as one pure integrator in series with the
    band-limited fit of s^(1-lam); the exact-integer cases degenerate to a
    pure integrator (lam = 1) or a static gain (lam = 0) with no fitted
    stage.  Derivative branch: kd*s^mu from the truncated split mu = n + f,
    with the n = 1 stage realized as the proper band-limited derivative
    s/(1 + s/omega_h) and the remainder fitted over the same band.
    """
    lam, mu = params.lam, params.mu

    # integral branch
    if params.ki == 0.0:
        integral = _static_gain(0.0)
    elif lam == 0.0:
        integral = _static_gain(params.ki)
    else:
        alpha = 1.0 - lam  # exponent of the fitted stage, in (-1, 1)
        if alpha == 0.0:
            stage = _integrator()
        else:
            stage = series(oustaloup(OustaloupSpec(alpha, omega_b, omega_h, n_half)),
                           _integrator())
        integral = _scale_output(stage, params.ki)

    # derivative branch
    if params.kd == 0.0:
        derivative = _static_gain(0.0)
    elif mu == 0.0:
        derivative = _static_gain(params.kd)
    else:
        n_int, frac = decompose_order(mu)
        stage = None
        if n_int == 1:
            stage = _band_limited_derivative(omega_h)
        if frac != 0.0:
            fit = oustaloup(OustaloupSpec(frac, omega_b, omega_h, n_half))
            stage = fit if stage is None else series(stage, fit)
        derivative = _scale_output(stage, params.kd)

    return RealizedController(integral, derivative, params.kp)


def step_controller(ctrl: RealizedController, ace: float, h: float) -> float:
    """Advance both branches one step with the same input; return the sum."""
    try:
        yi = step_lti(ctrl.integral_branch, ace, h)
        yd = step_lti(ctrl.derivative_branch, ace, h)
    except SimulationDiverged:
        raise
    return ctrl.kp * ace + float(yi[0]) + float(yd[0])


def controller_state_space(ctrl: RealizedController) -> tuple[np.ndarray, np.ndarray,
                                                              np.ndarray, float]:
    """Collapse both branches plus kp into one SISO (A, b, c, d) with fresh state.

    Zero-order controllers are padded with one inert state so downstream
    array-based integrators never see empty matrices.
    """
    bi, bd = ctrl.integral_branch, ctrl.derivative_branch
    n = bi.order + bd.order
    if n == 0:
        a = np.array([[-1.0]])
        b = np.zeros(1)
        c = np.zeros(1)
        d = float(bi.d[0, 0] + bd.d[0, 0] + ctrl.kp)
        return a, b, c, d
    a = np.zeros((n, n))
    ni = bi.order
    a[:ni, :ni] = bi.a
    a[ni:, ni:] = bd.a
    b = np.concatenate([bi.b[:, 0], bd.b[:, 0]])
    c = np.concatenate([bi.c[0, :], bd.c[0, :]])
    d = float(bi.d[0, 0] + bd.d[0, 0] + ctrl.kp)
    return a, b, c, d
