"""State-space realization, RK4 stepping, and static nonlinearities."""

import math

import numpy as np
import pytest

from focdes.lti_sim import (DeadBand, LtiSystem, RateLimiter, SimulationDiverged,
                            SolverConfig, apply_dead_band, frequency_response,
                            from_transfer_function, series, step_lti,
                            step_rate_limited_lag)


def dc_gain(sys):
    return float(frequency_response(sys, [0.0])[0].real)


class TestFromTransferFunction:
    def test_static_identity(self):
        sys = from_transfer_function([1.0], [1.0])
        assert sys.order == 0
        assert sys.d[0, 0] == 1.0

    def test_governor_pole(self):
        # 1/(0.1 s + 1): single pole at -10
        sys = from_transfer_function([1.0], [0.1, 1.0])
        assert sys.order == 1
        poles = np.linalg.eigvals(sys.a)
        assert poles == pytest.approx([-10.0])
        assert dc_gain(sys) == pytest.approx(1.0)

    def test_reheater_gains(self):
        # (5 s + 1)/(10 s + 1): DC gain 1, high-frequency gain 0.5
        # (oracle: transfer function evaluated at s = 0 and s -> inf)
        sys = from_transfer_function([5.0, 1.0], [10.0, 1.0])
        assert dc_gain(sys) == pytest.approx(1.0, abs=1e-12)
        assert sys.d[0, 0] == pytest.approx(0.5)

    def test_rejects_improper(self):
        with pytest.raises(ValueError):
            from_transfer_function([1.0, 0.0], [1.0])

    def test_rejects_zero_denominator(self):
        with pytest.raises(ValueError):
            from_transfer_function([1.0], [0.0])

    def test_fresh_state_is_zero(self):
        sys = from_transfer_function([1.0], [1.0, 2.0, 1.0])
        assert np.all(sys.state == 0.0)


class TestStepLti:
    def test_integrator_exact_for_constant_input(self):
        sys = LtiSystem([[0.0]], [[1.0]], [[1.0]], [[0.0]])
        y = 0.0
        for _ in range(100):
            y = step_lti(sys, 1.0, 0.01)
        assert float(y[0]) == pytest.approx(1.0, abs=1e-14)

    def test_first_order_lag_step_response(self):
        # 1/(s+1) unit step: y(1) = 1 - e^-1 = 0.6321205588285577
        sys = from_transfer_function([1.0], [1.0, 1.0])
        for _ in range(100):
            y = step_lti(sys, 1.0, 0.01)
        assert float(y[0]) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-6)

    def test_zero_input_zero_state(self):
        sys = from_transfer_function([1.0], [1.0, 0.5, 1.0])
        for _ in range(50):
            y = step_lti(sys, 0.0, 0.01)
        assert float(y[0]) == 0.0

    @pytest.mark.parametrize("tau", [0.1, 0.3, 10.0, 20.0])
    def test_matches_matrix_exponential_solution(self, tau):
        # closed form for first-order lag: y(t) = 1 - e^{-t/tau}
        sys = from_transfer_function([1.0], [tau, 1.0])
        h, steps = 0.01, 500
        for k in range(steps):
            y = step_lti(sys, 1.0, h)
            exact = 1.0 - math.exp(-(k + 1) * h / tau)
            assert float(y[0]) == pytest.approx(exact, rel=1e-6, abs=1e-12)

    def test_divergence_raises_with_time(self):
        # unstable pole with a step size far outside the RK4 stability region
        sys = LtiSystem([[10.0]], [[1.0]], [[1.0]], [[0.0]])
        with pytest.raises(SimulationDiverged) as err:
            for _ in range(10000):
                step_lti(sys, 1.0, 0.5)
        assert err.value.time is not None and err.value.time > 0

    def test_rejects_bad_input(self):
        sys = from_transfer_function([1.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            step_lti(sys, float("nan"), 0.01)
        with pytest.raises(ValueError):
            step_lti(sys, 1.0, 0.0)


class TestDeadBand:
    def test_inside_zone(self):
        assert apply_dead_band(DeadBand(0.0003), 0.0001) == 0.0

    def test_outside_zone_shifted(self):
        assert apply_dead_band(DeadBand(0.0003), 0.0103) == pytest.approx(0.01)

    def test_zero_width_is_identity(self):
        assert apply_dead_band(DeadBand(0.0), 0.5) == 0.5

    def test_odd_function(self):
        db = DeadBand(0.2)
        for x in np.linspace(-2, 2, 41):
            assert apply_dead_band(db, -x) == pytest.approx(-apply_dead_band(db, x))

    def test_negative_width_rejected(self):
        with pytest.raises(ValueError):
            DeadBand(-0.1)


class TestRateLimitedLag:
    def test_clamped_first_step(self):
        # raw rate (1-0)/0.3 = 3.33 clamps to 0.005 -> state moves 0.00005
        rl = RateLimiter(max_rate=0.005)
        out = step_rate_limited_lag(rl, 0.3, 1.0, 0.01)
        assert out == pytest.approx(5e-5, abs=1e-18)

    def test_equilibrium(self):
        rl = RateLimiter(max_rate=0.005, state=0.7)
        assert step_rate_limited_lag(rl, 0.3, 0.7, 0.01) == 0.7

    def test_unsaturated_matches_linear_lag_to_order_h(self):
        # forward Euler vs the RK4 lag: difference bounded by O(h)
        rl = RateLimiter(max_rate=1e9)
        lag = from_transfer_function([1.0], [0.3, 1.0])
        h = 0.01
        worst = 0.0
        for _ in range(500):
            fe = step_rate_limited_lag(rl, 0.3, 1.0, h)
            rk = float(step_lti(lag, 1.0, h)[0])
            worst = max(worst, abs(fe - rk))
        assert worst < h

    def test_output_slope_never_exceeds_limit(self):
        rng = np.random.default_rng(7)
        rl = RateLimiter(max_rate=0.25)
        h = 0.01
        prev = rl.state
        for _ in range(2000):
            out = step_rate_limited_lag(rl, 0.05, float(rng.normal()), h)
            assert abs(out - prev) <= 0.25 * h + 1e-12
            prev = out

    def test_invalid_rate_rejected(self):
        with pytest.raises(ValueError):
            RateLimiter(max_rate=0.0)


class TestSolverConfig:
    def test_defaults(self):
        cfg = SolverConfig()
        assert cfg.n_steps == 10000
        assert cfg.time_vector()[-1] == pytest.approx(100.0)

    def test_rejects_non_divisible_horizon(self):
        with pytest.raises(ValueError):
            SolverConfig(step_h=0.03, horizon_t=1.0)

    def test_rejects_bad_ordering(self):
        with pytest.raises(ValueError):
            SolverConfig(step_h=2.0, horizon_t=1.0)


class TestSeries:
    def test_series_frequency_response_is_product(self):
        gov = from_transfer_function([1.0], [0.1, 1.0])
        reh = from_transfer_function([5.0, 1.0], [10.0, 1.0])
        combined = series(gov, reh)
        w = np.logspace(-2, 2, 30)
        expected = frequency_response(gov, w) * frequency_response(reh, w)
        got = frequency_response(combined, w)
        assert np.allclose(got, expected, rtol=1e-9)

    def test_bounded_output_for_stable_system(self):
        sys = from_transfer_function([1.0], [1.0, 0.8, 1.0])
        rng = np.random.default_rng(3)
        for _ in range(3000):
            y = step_lti(sys, float(rng.uniform(-1, 1)), 0.01)
        assert np.isfinite(y).all()
