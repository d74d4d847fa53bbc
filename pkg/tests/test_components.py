import math

import numpy as np
import pytest

from enspace.components import (RlcParams, RlcState, LoadProfile,
                                rlc_state_derivative, rlc_energy_output,
                                rlc_eta, rlc_eta_normal_form, cpl_incoming_rate)
from enspace.errors import DegenerateState, OutOfHorizon

from conftest import PAPER


class TestRlcStateDerivative:
    def test_equilibrium_is_fixed_point(self):
        s = RlcState(15.0, 80.0, 80.15)
        di, dv = rlc_state_derivative(s, PAPER, 0.0, -1200.0)
        assert abs(di) < 1e-9 and abs(dv) < 1e-9

    def test_unloaded_acceleration(self):
        di, dv = rlc_state_derivative(RlcState(0.0, 0.0, 1.0), PAPER)
        assert di == pytest.approx(1.0 / PAPER.L)
        assert di == pytest.approx(892.857, rel=1e-5)
        assert dv == 0.0

    def test_voltage_rise_after_perturbation(self):
        # raising v shrinks the load current: dv/dt = (15 - 1200/81)/C
        di, dv = rlc_state_derivative(RlcState(15.0, 81.0, 80.15), PAPER, 0.0, -1200.0)
        assert dv == pytest.approx((15.0 - 1200.0 / 81.0) / PAPER.C)
        assert dv == pytest.approx(27.23, abs=0.01)

    def test_guards(self):
        with pytest.raises(DegenerateState):
            rlc_state_derivative(RlcState(0.0, 80.0, 80.0), PAPER, P_mm=5.0)
        with pytest.raises(DegenerateState):
            rlc_state_derivative(RlcState(1.0, 0.0, 80.0), PAPER, P_mu=-5.0)

    def test_power_balance_random_states(self):
        # chain-rule energy rate equals u i - R i^2 + P_mm + P_mu
        rng = np.random.default_rng(11)
        for _ in range(500):
            i, v, u = rng.uniform([0.5, 40.0, 40.0], [30.0, 120.0, 120.0])
            P_mm, P_mu = rng.uniform(-500, 500, 2)
            di, dv = rlc_state_derivative(RlcState(i, v, u), PAPER, P_mm, P_mu)
            lhs = PAPER.L * i * di + PAPER.C * v * dv
            rhs = u * i - PAPER.R * i * i + P_mm + P_mu
            scale = max(1.0, abs(u * i), abs(P_mm), abs(P_mu))
            assert abs(lhs - rhs) <= 1e-6 * scale


class TestRlcEnergyOutput:
    def test_equilibrium_equals_minus_load_power(self):
        assert rlc_energy_output(RlcState(15.0, 80.0, 80.15), PAPER) \
            == pytest.approx(-1200.0)

    def test_zero_current(self):
        assert rlc_energy_output(RlcState(0.0, 55.0, 99.0), PAPER) == 0.0

    def test_with_matched_disturbance(self):
        assert rlc_energy_output(RlcState(1.0, 80.0, 80.0), PAPER, P_mm=5.0) \
            == pytest.approx(-84.99)

    def test_any_equilibrium_matches_load(self):
        # at any steady state of the loaded model, y_z = -P_l
        for P_l, v in ((800.0, 76.0), (1500.0, 83.0)):
            i = P_l / v
            u = v + PAPER.R * i
            assert rlc_energy_output(RlcState(i, v, u), PAPER) \
                == pytest.approx(-P_l, rel=1e-12)


class TestRlcEta:
    def test_zero_derivatives(self):
        s = RlcState(15.0, 80.0, 80.15)
        assert rlc_eta(s, 0.0, 0.0, PAPER, 15.0, 0.0) == 0.0
        assert rlc_eta_normal_form(s, 0.0, 0.0, PAPER) == 0.0

    def test_term_by_term(self):
        s = RlcState(15.0, 80.0, 80.15)
        val = rlc_eta(s, 1.0, 0.0, PAPER, 15.0, 0.0)
        # 4Et = 0.00224; capacitor block 2*(80*1) = 160;
        # last block 0.3 - 160.3 + 0.00224
        assert val == pytest.approx(0.00448, abs=1e-10)

    def test_normal_form_grouping(self):
        s = RlcState(15.0, 80.0, 80.15)
        et4 = 2 * PAPER.L * 1.0
        assert rlc_eta_normal_form(s, 1.0, 0.0, PAPER) \
            == pytest.approx(2 * (PAPER.R * 15 - 80.15) * 1.0 + et4)

    def test_constant_trajectory_identically_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            i, v, u = rng.uniform([1, 40, 40], [30, 120, 120])
            assert rlc_eta(RlcState(i, v, u), 0.0, 0.0, PAPER, i, 0.0) == 0.0


class TestCplIncomingRate:
    def test_constant_power_steady_voltage(self):
        r = cpl_incoming_rate(1200.0, 0.0, 80.0, 0.0)
        assert r.as_tuple() == (-1200.0, 0.0)

    def test_moving_voltage(self):
        r = cpl_incoming_rate(1200.0, 0.0, 80.0, 4.0)
        assert r.reactive_rate == pytest.approx(2 * 15.0 * 4.0)

    def test_voltage_guard(self):
        with pytest.raises(DegenerateState):
            cpl_incoming_rate(1200.0, 0.0, 0.0, 0.0)


class TestLoadProfile:
    def test_constant(self):
        prof = LoadProfile.constant(1200.0, horizon=10.0)
        assert prof.evaluate(3.0) == (1200.0, 0.0)

    def test_linear_ramp(self):
        prof = LoadProfile("piecewise_linear", [0.0, 1.0], [1000.0, 1400.0])
        P, dP = prof.evaluate(0.5)
        assert P == pytest.approx(1200.0) and dP == pytest.approx(400.0)

    def test_out_of_horizon(self):
        prof = LoadProfile("piecewise_linear", [0.0, 1.0], [1000.0, 1400.0])
        with pytest.raises(OutOfHorizon):
            prof.evaluate(1.5)

    def test_piecewise_constant_steps_have_zero_rate(self):
        prof = LoadProfile("piecewise_constant", [0.0, 1.0, 2.0], [800.0, 1600.0, 1600.0])
        assert prof.evaluate(0.5) == (800.0, 0.0)
        assert prof.evaluate(1.0) == (1600.0, 0.0)
        assert prof.evaluate(1.5) == (1600.0, 0.0)

    def test_jump_in_pwl_profile(self):
        prof = LoadProfile("piecewise_linear", [0.0, 1.0, 1.0, 2.0],
                           [800.0, 800.0, 1600.0, 1600.0])
        assert prof.evaluate(0.999) == (800.0, 0.0)
        assert prof.evaluate(1.0) == (1600.0, 0.0)

    def test_window_ranges_exact(self):
        prof = LoadProfile("piecewise_linear",
                           [0.0, 0.35, 0.358, 1.0], [1200.0, 1200.0, 1600.0, 1600.0])
        Pmin, Pmax, Smin, Smax = prof.window_ranges(0.0, 1.0)
        assert (Pmin, Pmax) == (1200.0, 1600.0)
        assert Smin == 0.0
        assert Smax == pytest.approx(400.0 / 0.008)

    def test_breakpoints_between(self):
        prof = LoadProfile("piecewise_linear", [0.0, 0.35, 0.358, 1.0],
                           [1200.0, 1200.0, 1600.0, 1600.0])
        assert prof.breakpoints_between(0.34999, 0.3501) == [0.35]
        assert prof.breakpoints_between(0.0, 0.1) == []

    def test_rejects_nonpositive_power(self):
        with pytest.raises(ValueError):
            LoadProfile("piecewise_linear", [0.0, 1.0], [100.0, 0.0])

    def test_csv_round_trip(self, tmp_path):
        prof = LoadProfile("piecewise_linear", [0.0, 0.5, 1.0],
                           [1000.0, 1200.0, 900.0])
        path = tmp_path / "load.csv"
        prof.to_csv(path)
        back = LoadProfile.from_csv(path)
        assert back.times == prof.times and back.powers == prof.powers

    def test_csv_requires_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.0,100.0\n1.0,200.0\n")
        with pytest.raises(ValueError):
            LoadProfile.from_csv(path)
