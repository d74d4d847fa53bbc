import math

import numpy as np
import pytest

from enspace.errors import NoReaching
from enspace.verification import (audit_fblc_stability, audit_dissipativity,
                                  audit_smc_reaching, audit_network_lyapunov,
                                  audit_tellegen, metrics)
from enspace.controllers import SmcConfig

from conftest import make_trajectory


class TestMetrics:
    def test_constant_trajectory(self):
        t = np.arange(0.0, 1.0, 0.01)
        traj = make_trajectory(t, v=80.0)
        m = metrics(traj)
        assert m.settling_time == 0.0
        assert m.overshoot == 0.0
        assert m.settled

    def test_first_order_decay_settles_at_ln50_over_k(self):
        K = 100.0
        t = np.arange(0.0, 0.1, 1e-4)
        v = 80.0 - 10.0 * np.exp(-K * t)
        m = metrics(make_trajectory(t, v=v), band=0.02)
        assert m.settling_time == pytest.approx(math.log(50.0) / K, rel=0.02)
        assert m.settled

    def test_square_wave_never_settles(self):
        t = np.arange(0.0, 1.0, 0.01)
        v = 80.0 + 5.0 * np.sign(np.sin(40 * t))
        m = metrics(make_trajectory(t, v=v))
        assert not m.settled
        assert m.settling_time == pytest.approx(t[-1])

    def test_overshoot(self):
        t = np.linspace(0.0, 1.0, 1001)
        v = 1.0 - np.exp(-5 * t) * np.cos(20 * t) * 1.0
        m = metrics(make_trajectory(t, v=v))
        assert m.overshoot > 0.0

    def test_max_du_dt_uses_peak_hold(self):
        t = np.arange(0.0, 1.0, 0.01)
        traj = make_trajectory(t, du_dt=1.0, du_dt_peak=42.0)
        assert metrics(traj).max_du_dt == 42.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            metrics(make_trajectory([]))


class TestFblcStabilityAudit:
    def _traj(self, scale_eta):
        K = 100.0
        t = np.arange(0.0, 1.0, 1e-3)
        e = 1000.0 * np.exp(-K * t)
        eta_tilde = scale_eta * K * np.abs(e)
        return make_trajectory(t, sigma=e, eta_tilde=eta_tilde, E_t=0.0,
                               meta={"gain_K": K})

    def test_half_bound_passes(self):
        check = audit_fblc_stability(self._traj(0.5))
        assert check.passed

    def test_double_bound_fails(self):
        check = audit_fblc_stability(self._traj(2.0))
        assert not check.passed

    def test_terminal_boundary_cases_reported_not_failed(self):
        K = 100.0
        t = np.arange(0.0, 1.0, 1e-3)
        e = 1000.0 * np.exp(-K * t)
        # big covered transient early, residual tangent motion in the tail:
        # tail samples violate pointwise but both sides are tiny vs run scale
        et = np.where(t < 0.01, 1e4, 0.0) + np.where(t > 0.2, 50.0, 0.0)
        traj = make_trajectory(t, sigma=e, eta_tilde=0.0, E_t=et,
                               meta={"gain_K": K})
        check = audit_fblc_stability(traj)
        assert check.passed
        assert "boundary_samples" in check.detail
        assert int(check.detail.split("=")[1]) > 0


class TestDissipativityAudit:
    def _equilibrium(self):
        t = np.arange(0.0, 1.0, 1e-3)
        return make_trajectory(t, y_z=-1200.0, y_ref=-1200.0, dy_z=0.0,
                               sigma=0.0, Qd_in_src=0.0, dy_ref=0.0,
                               eta_tilde=0.0)

    def test_equilibrium_passes(self):
        assert audit_dissipativity(self._equilibrium()).passed

    def test_negated_supply_fails(self):
        traj = self._equilibrium()
        check = audit_dissipativity(traj, supply_override=-1e6)
        assert not check.passed

    def test_calibration_pair(self):
        # strictly dissipative motion passes with zero supply, and the
        # large-negative surrogate always fails
        t = np.arange(0.0, 1.0, 1e-3)
        y = -100.0 - 50.0 * (1 - np.exp(-5 * t))
        dy = -250.0 * np.exp(-5 * t)
        traj = make_trajectory(t, y_z=y, dy_z=dy, sigma=0.0, eta_tilde=0.0,
                               Qd_in_src=1e9)
        assert audit_dissipativity(traj, supply_override=0.0).passed
        assert not audit_dissipativity(traj, supply_override=-1e9).passed

    def test_premise_gating(self):
        # violating samples where the premise is inactive do not fail
        t = np.arange(0.0, 1.0, 1e-3)
        qin = np.where(t < 0.5, -100.0, 100.0)
        dy = np.where(t < 0.5, 50.0, 0.0)  # violates only where qin < 0
        traj = make_trajectory(t, dy_z=dy, sigma=0.0, dy_ref=0.0,
                               Qd_in_src=qin, eta_tilde=0.0)
        check = audit_dissipativity(traj)
        assert check.passed
        assert int(check.detail.split("=")[1]) > 0

    def test_corrupted_sample_flagged(self):
        traj = self._equilibrium()
        data = traj._data.copy()
        j = traj.COLUMNS.index("dy_z")
        data[500, j] = 1e6
        corrupted = type(traj)(data, traj.meta)
        assert not audit_dissipativity(corrupted).passed

    def test_reaudit_is_deterministic(self):
        traj = self._equilibrium()
        a = audit_dissipativity(traj)
        b = audit_dissipativity(traj)
        assert a == b


class TestSmcReachingAudit:
    def test_zero_start(self):
        t = np.arange(0.0, 0.1, 1e-3)
        traj = make_trajectory(t, sigma=0.0, meta={"controller": "smc"})
        t_reach, b2, br2, check = audit_smc_reaching(traj, SmcConfig(K=100.0))
        assert t_reach == 0.0 and check.passed

    def test_crossing_detected_and_bounded(self):
        K = 100.0
        t = np.arange(0.0, 0.1, 1e-4)
        sigma = 300.0 - 3e4 * t  # crosses at t = 0.01
        traj = make_trajectory(t, sigma=sigma)
        t_reach, b2, br2, check = audit_smc_reaching(traj, SmcConfig(K=K))
        assert t_reach == pytest.approx(0.01, abs=2e-4)
        assert b2 == pytest.approx(2.0 / K * 300.0)
        assert br2 == pytest.approx(math.sqrt(2.0) / K * 300.0)
        assert check.passed

    def test_no_reaching_raises(self):
        t = np.arange(0.0, 0.01, 1e-4)
        traj = make_trajectory(t, sigma=300.0)
        with pytest.raises(NoReaching):
            audit_smc_reaching(traj, SmcConfig(K=0.001))


class TestNetworkLyapunov:
    def test_single_component_reduces_to_zero_supply_decrease(self):
        t = np.arange(0.0, 3.0, 1e-3)
        good = make_trajectory(t, sigma=100.0 * np.exp(-3 * t), y_z=-1000.0)
        bad = make_trajectory(t, sigma=10.0 + 50.0 * t, y_z=-1000.0)
        L0 = np.zeros((1, 1))
        assert audit_network_lyapunov([good], L0, window_s=1.0).passed
        assert not audit_network_lyapunov([bad], L0, window_s=1.0).passed

    def test_two_component_weighting(self):
        t = np.arange(0.0, 2.0, 1e-3)
        tr = make_trajectory(t, sigma=50.0 * np.exp(-4 * t), y_z=-1000.0)
        L = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert audit_network_lyapunov([tr, None], L, window_s=1.0).passed


class TestTellegenAudit:
    def test_balanced_junction_passes(self):
        t = np.arange(0.0, 1.0, 1e-2)
        q = np.sin(5 * t) * 100.0
        traj = make_trajectory(t, P_out_src=-1200.0, P_out_load=1200.0,
                               Qd_out_src=q, Qd_out_load=-q)
        assert audit_tellegen(traj).passed

    def test_imbalance_fails(self):
        t = np.arange(0.0, 1.0, 1e-2)
        traj = make_trajectory(t, P_out_src=-1200.0, P_out_load=1190.0,
                               Qd_out_src=0.0, Qd_out_load=0.0)
        assert not audit_tellegen(traj).passed
