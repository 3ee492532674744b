"""Sweeps, logistic fits, double-critical extraction, and capacity bounds."""

import math

import numpy as np
import pytest

from streetperc import (NetworkParams, Window, fit_logistic, hop_bound,
                        phase_diagram, pole_capacity, sweep)
from streetperc.errors import DirectionError, NoTransitionError, ParameterError
from streetperc.experiments import (FALLING, RISING, CurvePoint,
                                    TransitionCurve, apply_parameter,
                                    extract_double_critical)


def logistic(u, a, b):
    return 1.0 / (1.0 + np.exp(a * u + b))


def curve_from_probs(values, probs, reps=200):
    points = tuple(
        CurvePoint(float(v), reps, int(round(p * reps)), float(p),
                   max(0.0, p - 0.05), min(1.0, p + 0.05))
        for v, p in zip(values, probs))
    return TransitionCurve("U", points)


class TestApplyParameter:
    def test_u_maps_through_mean_street_length(self, params):
        q = apply_parameter(params, "U", 3.6)
        ell1 = 2.0 / (3.0 * math.sqrt(params.street_intensity))
        assert q.user_intensity == pytest.approx(3.6 / ell1)

    def test_nbar_scales_with_power(self, params):
        q = apply_parameter(params.with_(power=2.0), "nbar", 1e-8)
        assert q.noise == pytest.approx(2e-8)

    def test_direct_fields(self, params):
        assert apply_parameter(params, "theta", 0.002).interference_factor == 0.002
        assert apply_parameter(params, "tau", 0.658).sinr_threshold == 0.658
        assert apply_parameter(params, "p", 0.8).relay_prob == 0.8
        assert apply_parameter(params, "kappa", 50.5).pathloss_scale == 50.5
        assert apply_parameter(params, "beta", 1.95).pathloss_exponent == 1.95
        assert apply_parameter(params, "lambda", 0.01).user_intensity == 0.01

    def test_unknown_parameter(self, params):
        with pytest.raises(ParameterError):
            apply_parameter(params, "zeta", 1.0)


class TestLogisticFit:
    def test_exact_recovery_rising(self):
        a, b = -1.4, 6.3  # rising: probability increases with u
        u = np.linspace(0, 10, 41)
        fit = fit_logistic(u, logistic(u, a, b), 10**9, RISING)
        assert fit.critical_value == pytest.approx(-b / a, rel=1e-6)
        assert fit.slope == pytest.approx(-a, rel=1e-6)
        assert fit.residual < 1e-6

    def test_exact_recovery_falling(self):
        a, b = 2.0, -12.0
        u = np.linspace(0, 10, 41)
        fit = fit_logistic(u, logistic(u, a, b), 10**9, FALLING)
        assert fit.critical_value == pytest.approx(6.0, rel=1e-6)

    def test_direction_mismatch_raises(self):
        u = np.linspace(0, 10, 11)
        probs = logistic(u, 2.0, -10.0)  # falling
        with pytest.raises(DirectionError):
            fit_logistic(u, probs, 200, RISING)

    def test_flat_segments_raise(self):
        u = np.array([0.0, 1.0, 2.0])
        with pytest.raises(NoTransitionError):
            fit_logistic(u, [0.0, 0.01, 0.02], 200, RISING)
        with pytest.raises(NoTransitionError):
            fit_logistic(u, [0.99, 1.0, 0.98], 200, FALLING)
        with pytest.raises(NoTransitionError):
            fit_logistic(u[:2], [0.1, 0.9], 200, RISING)

    def test_binomial_noise_recovery(self):
        # criterion-8 style: R = 200 draws per point still recovers the
        # inflection within a few percent.
        a, b = 1.5, -9.0
        u = np.linspace(0, 10, 41)
        rng = np.random.default_rng(5)
        noisy = rng.binomial(200, logistic(u, a, b)) / 200.0
        fit = fit_logistic(u, noisy, 200, FALLING)
        assert fit.critical_value == pytest.approx(6.0, rel=0.05)


class TestDoubleCritical:
    def test_recovers_synthetic_double_transition(self):
        u = np.arange(0, 10.5, 0.5)
        probs = logistic(u, -3.0, 5.0) * logistic(u, 3.0, -18.0)
        u1, u2 = extract_double_critical(curve_from_probs(u, probs))
        assert u1 == pytest.approx(5.0 / 3.0, abs=0.3)
        assert u2 == pytest.approx(6.0, abs=0.3)

    def test_flat_curve_has_no_window(self):
        u = np.arange(0, 10.5, 0.5)
        u1, u2 = extract_double_critical(curve_from_probs(u, np.full(len(u), 0.2)))
        assert u1 is None and u2 is None

    def test_rising_only_curve_is_partial(self):
        u = np.arange(0, 10.5, 0.5)
        probs = logistic(u, -3.0, 5.0)  # saturates at 1, never falls
        u1, u2 = extract_double_critical(curve_from_probs(u, probs))
        # the long clipped plateau flattens the fitted slope, so only the
        # rough location is checked here
        assert u1 is not None and 0.5 < u1 < 2.5
        assert u2 is None


class TestSweep:
    def test_smoke_and_grid_validation(self, params):
        window = Window(400.0)
        curve = sweep(params, "U", [0.0, 2.0, 4.0], window, 3, 61)
        assert [p.value for p in curve.points] == [0.0, 2.0, 4.0]
        assert all(p.replications == 3 and p.status == "ok"
                   for p in curve.points)
        with pytest.raises(ParameterError):
            sweep(params, "U", [1.0, 1.0], window, 1, 0)
        with pytest.raises(ParameterError):
            sweep(params, "U", [], window, 1, 0)

    def test_inadmissible_point_flagged_not_raised(self, params):
        window = Window(400.0)
        curve = sweep(params, "tau", [0.5, 2e8], window, 2, 67)
        assert curve.points[0].status == "ok"
        assert curve.points[1].status == "error"
        assert math.isnan(curve.points[1].probability)
        assert len(curve.ok_points().points) == 1

    def test_deterministic(self, params):
        window = Window(400.0)
        a = sweep(params, "theta", [0.002, 0.004], window, 3, 71)
        b = sweep(params, "theta", [0.002, 0.004], window, 3, 71)
        assert a == b


class TestPhaseDiagram:
    def test_small_diagram_statuses(self, params):
        window = Window(500.0)
        grid = np.arange(0.0, 8.1, 1.0)
        diagram = phase_diagram([0.004, 0.2], params, window, 8, 73,
                                u_grid=grid)
        assert len(diagram.rows) == 2
        assert diagram.rows[0].theta == 0.004
        for row in diagram.rows:
            assert row.status in ("ok", "partial", "no-window", "error")
        # strong interference reduction never percolates on this window
        assert diagram.rows[1].status == "no-window"
        assert diagram.rows[1].u1_star is None


class TestCapacityBounds:
    def test_pole_capacity_reference_values(self):
        assert pole_capacity(0.004, 1.0) == pytest.approx(251.0)
        assert pole_capacity(0.0, 1.0) == math.inf
        assert pole_capacity(0.004, 0.0) == math.inf
        with pytest.raises(ParameterError):
            pole_capacity(-0.1, 1.0)

    def test_hop_bound_reference_values(self):
        assert hop_bound(1.0, 0.004, 1.0) == pytest.approx(125.5)
        # theta * tau = 0.217 gives M/2 ~ 2.8 and a bound near ten for
        # H = 3.5
        assert hop_bound(3.5, 0.217, 1.0) == pytest.approx(9.81, abs=0.05)
        with pytest.raises(ParameterError):
            hop_bound(0.0, 0.004, 1.0)
