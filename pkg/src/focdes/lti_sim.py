"""Continuous-time simulation primitives.

Linear blocks are kept in state-space form and advanced with classical
4th-order Runge-Kutta under a zero-order hold on the input.  The two static
nonlinearities of the plant (governor dead-band, generation rate constraint)
live here as well so every higher-level model is assembled from one small
set of audited pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SimulationDiverged(RuntimeError):
    """State became non-finite (overflow); carries the time of divergence."""

    def __init__(self, time: float | None = None):
        self.time = time
        at = f" at t={time:.4f} s" if time is not None else ""
        super().__init__(f"simulation diverged (non-finite state){at}")


@dataclass
class LtiSystem:
    """State-space block dx/dt = a x + b u, y = c x + d u.

    A freshly constructed system has an all-zero state.  Instances carry
    mutable state and are single-owner: clone with ``copy()`` before sharing.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    state: np.ndarray = field(init=False)
    clock: float = field(init=False, default=0.0)

    def __post_init__(self):
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.b = np.atleast_2d(np.asarray(self.b, dtype=float))
        self.c = np.atleast_2d(np.asarray(self.c, dtype=float))
        self.d = np.atleast_2d(np.asarray(self.d, dtype=float))
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise ValueError(f"a must be square, got {self.a.shape}")
        m = self.b.shape[1]
        p = self.c.shape[0]
        if self.b.shape != (n, m):
            raise ValueError(f"b must be ({n}, {m}), got {self.b.shape}")
        if self.c.shape != (p, n):
            raise ValueError(f"c must be ({p}, {n}), got {self.c.shape}")
        if self.d.shape != (p, m):
            raise ValueError(f"d must be ({p}, {m}), got {self.d.shape}")
        self.state = np.zeros(n)

    @property
    def order(self) -> int:
        return self.a.shape[0]

    def reset(self) -> None:
        self.state = np.zeros(self.order)
        self.clock = 0.0

    def copy(self) -> "LtiSystem":
        other = LtiSystem(self.a.copy(), self.b.copy(), self.c.copy(), self.d.copy())
        other.state = self.state.copy()
        other.clock = self.clock
        return other

    def output(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return self.c @ self.state + self.d @ u


@dataclass
class DeadBand:
    """Dead-zone: zero inside +-half_width, shifted by half_width outside."""

    half_width: float

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be >= 0")


@dataclass
class RateLimiter:
    """State of a rate-limited first-order lag (GRC realization)."""

    max_rate: float
    state: float = 0.0

    def __post_init__(self):
        if not self.max_rate > 0:
            raise ValueError("max_rate must be > 0")


@dataclass
class SolverConfig:
    """Fixed-step solver settings: step size and horizon in seconds."""

    step_h: float = 0.01
    horizon_t: float = 100.0

    def __post_init__(self):
        if not 0 < self.step_h < self.horizon_t:
            raise ValueError("need 0 < step_h < horizon_t")
        ratio = self.horizon_t / self.step_h
        if abs(ratio - round(ratio)) > 1e-6:
            raise ValueError("horizon_t must be an integer multiple of step_h")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon_t / self.step_h))

    def time_vector(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.step_h


def from_transfer_function(numerator, denominator) -> LtiSystem:
    """Controllable-canonical realization of num/den (coefficients descending in s).

    Rejects improper transfer functions (deg num > deg den) and zero leading
    denominator coefficients.
    """
    num = np.atleast_1d(np.asarray(numerator, dtype=float))
    den = np.atleast_1d(np.asarray(denominator, dtype=float))
    num = np.trim_zeros(num, "f")
    den = np.trim_zeros(den, "f")
    if den.size == 0:
        raise ValueError("denominator is zero")
    if num.size == 0:
        num = np.zeros(1)
    if num.size > den.size:
        raise ValueError("improper transfer function: deg(num) > deg(den)")
    num = num / den[0]
    den = den / den[0]
    n = den.size - 1
    if n == 0:
        # static gain, zero-dimensional state
        return LtiSystem(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                         np.array([[num[0]]]))
    num = np.concatenate([np.zeros(n + 1 - num.size), num])
    d = num[0]
    a = np.zeros((n, n))
    if n > 1:
        a[:-1, 1:] = np.eye(n - 1)
    a[-1, :] = -den[:0:-1]          # last row: -[a0 a1 ... a_{n-1}]
    b = np.zeros((n, 1))
    b[-1, 0] = 1.0
    c = (num[:0:-1] - d * den[:0:-1]).reshape(1, n)
    return LtiSystem(a, b, c, np.array([[d]]))


def step_lti(sys: LtiSystem, u, h: float) -> np.ndarray:
    """Advance one RK4 step of size h under zero-order-hold input; return output.

    Raises SimulationDiverged if the state leaves the finite range.
    """
    if not h > 0:
        raise ValueError("h must be > 0")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if not np.all(np.isfinite(u)):
        raise ValueError("input must be finite")
    a, b = sys.a, sys.b
    x = sys.state
    with np.errstate(over="ignore", invalid="ignore"):
        bu = b @ u
        k1 = a @ x + bu
        k2 = a @ (x + 0.5 * h * k1) + bu
        k3 = a @ (x + 0.5 * h * k2) + bu
        k4 = a @ (x + h * k3) + bu
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    sys.clock += h
    if not np.all(np.isfinite(x)):
        raise SimulationDiverged(sys.clock)
    sys.state = x
    return sys.c @ x + sys.d @ u


def apply_dead_band(db: DeadBand, x: float) -> float:
    """Dead-zone convention: 0 inside the band, x shifted by half_width outside."""
    if abs(x) <= db.half_width:
        return 0.0
    return x - np.sign(x) * db.half_width


def step_rate_limited_lag(rl: RateLimiter, time_constant: float, input_value: float,
                          h: float) -> float:
    """Forward-Euler step of a first-order lag whose state rate is clamped.

    The clamp makes the dynamics non-smooth, so a higher-order stage buys
    nothing here; the plain Euler update is the contract.
    """
    if not time_constant > 0:
        raise ValueError("time_constant must be > 0")
    if not h > 0:
        raise ValueError("h must be > 0")
    rate = (input_value - rl.state) / time_constant
    rate = min(max(rate, -rl.max_rate), rl.max_rate)
    rl.state += h * rate
    return rl.state


def series(first: LtiSystem, second: LtiSystem) -> LtiSystem:
    """Series interconnection: input -> first -> second -> output."""
    if second.b.shape[1] != first.c.shape[0]:
        raise ValueError("dimension mismatch in series connection")
    n1, n2 = first.order, second.order
    a = np.zeros((n1 + n2, n1 + n2))
    a[:n1, :n1] = first.a
    a[n1:, n1:] = second.a
    a[n1:, :n1] = second.b @ first.c
    b = np.vstack([first.b, second.b @ first.d])
    c = np.hstack([second.d @ first.c, second.c])
    d = second.d @ first.d
    return LtiSystem(a, b, c, d)


def frequency_response(sys: LtiSystem, omega) -> np.ndarray:
    """Evaluate C (jwI - A)^-1 B + D over an array of frequencies (SISO)."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n = sys.order
    out = np.empty(omega.size, dtype=complex)
    eye = np.eye(n)
    for i, w in enumerate(omega):
        if n:
            out[i] = (sys.c @ np.linalg.solve(1j * w * eye - sys.a, sys.b) + sys.d)[0, 0]
        else:
            out[i] = sys.d[0, 0]
    return out
