"""Numerical certificate audits and standard control metrics.

Audits are pure functions of a recorded trajectory.  Each verdict states the
exact inequality evaluated, the worst margin found and where.  A FAIL on a
sufficient condition means "certificate not established", never "system
unstable".

Certificate checks are conditional where the underlying result is: samples
where a premise does not hold are excluded from the inequality check and
counted separately.  Rates of recorded signals come from the analytically
recorded rate columns where available (exact along solver trajectories);
finite differences on the decimated grid are the fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoReaching
from .feasibility import RangeSchedule, detect_violation


@dataclass(frozen=True)
class CheckResult:
    """One audited inequality."""

    name: str
    verdict: str               # 'PASS' | 'FAIL' | 'SKIP'
    inequality: str            # human-readable statement of what was checked
    worst_margin: float        # most positive violation (<= tol passes)
    t_worst: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def csv_row(self):
        return [self.name, self.verdict, repr(self.worst_margin), repr(self.t_worst)]


@dataclass
class AuditReport:
    checks: list = field(default_factory=list)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def __iter__(self):
        return iter(self.checks)

    def to_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["check", "verdict", "worst_margin", "t_worst"])
            for c in self.checks:
                w.writerow(c.csv_row())

    def lines(self):
        for c in self.checks:
            yield (f"{c.name}: {c.verdict} (worst margin {c.worst_margin:.6g} "
                   f"vs tol {c.tolerance:.6g} at t={c.t_worst:.6g}s) [{c.inequality}]"
                   + (f" {c.detail}" if c.detail else ""))


def _worst(viol, t, tol, mask=None):
    """Summarize a pointwise violation array; mask selects checked samples."""
    if mask is not None:
        viol = np.where(mask, viol, -np.inf)
    if viol.size == 0 or not np.any(np.isfinite(viol)):
        return 0.0, 0.0, True
    j = int(np.argmax(viol))
    worst = float(viol[j])
    return worst, float(t[j]), worst <= tol


def audit_fblc_stability(traj, boundary_frac: float = 0.01) -> CheckResult:
    """Sufficient-stability condition |eta_tilde - 4 Et| <= K |e| pointwise.

    Samples where both sides are below boundary_frac of their run scale are
    terminal-neighborhood boundary cases: reported, not failed (the
    condition degenerates as e -> 0 with residual motion).
    """
    K = float(traj.meta.get("gain_K", 100.0))
    e = traj.sigma
    lhs = np.abs(traj.eta_tilde - 4.0 * traj.E_t)
    rhs = K * np.abs(e)
    viol = lhs - rhs
    scale_l = np.max(lhs) if len(traj) else 0.0
    scale_r = np.max(rhs) if len(traj) else 0.0
    tol = 1e-3 * max(scale_r, 1e-30)
    boundary = (viol > tol) & (lhs < boundary_frac * scale_l) \
        & (rhs < boundary_frac * scale_r)
    checked = ~boundary
    worst, t_w, ok = _worst(viol, traj.t, tol, checked)
    return CheckResult(
        "fblc_sufficient_stability", "PASS" if ok else "FAIL",
        "|eta_tilde - 4*E_t| <= K*|y_z - y_ref|", worst, t_w, tol,
        detail=f"boundary_samples={int(np.sum(boundary))}")


def audit_dissipativity(traj, supply_override=None) -> CheckResult:
    """Dissipation inequality dS/dt <= supply along the run.

    Energy-controller runs: storage S = y_z, supply
    -K e + dy_ref + Qd_in, checked where the premise eta_tilde <= Qd_in
    holds (the certificate is conditional on it).  With the power-tracking
    objective dy_ref equals the incoming power rate, recovering the plain
    supply form.

    Other runs: storage S with dS/dt = 4 Et + dD/dt (integral of tangent
    energy plus the decay term), supply = Pdot_in + Qd_in, unconditional.

    supply_override replaces the supply series (calibration hook).
    """
    t = traj.t
    kind = traj.meta.get("controller", "")
    if kind in ("fblc", "smc"):
        K = float(traj.meta.get("gain_K", 100.0))
        dS = traj.dy_z
        supply = -K * traj.sigma + traj.dy_ref + traj.Qd_in_src
        eta_tilde = np.nan_to_num(traj.eta_tilde, nan=0.0)
        premise = eta_tilde <= traj.Qd_in_src
        name = "dissipativity_energy_ctrl"
        ineq = "d(y_z)/dt <= -K*e + dy_ref + Qd_in  where eta_tilde <= Qd_in"
    else:
        dD = np.gradient(traj.D, t) if len(traj) > 2 else np.zeros_like(t)
        dS = 4.0 * traj.E_t + dD
        supply = np.gradient(traj.P_in_src, t) + traj.Qd_in_src \
            if len(traj) > 2 else traj.Qd_in_src
        premise = np.ones(len(traj), dtype=bool)
        name = "dissipativity_storage"
        ineq = "4*E_t + d(E/tau)/dt <= Pdot_in + Qd_in"
    if supply_override is not None:
        supply = np.broadcast_to(np.asarray(supply_override, dtype=float), dS.shape)
        premise = np.ones(len(traj), dtype=bool)
    tol = 1e-3 * max(float(np.max(np.abs(supply))) if len(traj) else 0.0, 1e-30)
    interior = np.zeros(len(traj), dtype=bool)
    interior[1:-1] = True
    worst, t_w, ok = _worst(dS - supply, t, tol, premise & interior)
    return CheckResult(
        name, "PASS" if ok else "FAIL", ineq, worst, t_w, tol,
        detail=f"premise_inactive={int(np.sum(~premise))}")


def audit_smc_reaching(traj, cfg=None):
    """First zero crossing of sigma vs the finite reaching-time bounds.

    Returns (t_reach, bound_stated, bound_derived, CheckResult); the verdict
    compares against the looser stated bound (2/K)|sigma(0)|, and the
    derived (sqrt(2)/K)|sigma(0)| is reported alongside.  sigma(0) = 0
    reaches at t = 0.  Raises NoReaching when sigma never crosses.
    """
    K = cfg.K if cfg is not None else float(traj.meta.get("gain_K", 100.0))
    t = traj.t
    sig = traj.sigma
    s0 = float(sig[0])
    bound2 = 2.0 / K * abs(s0)
    bound_r2 = math.sqrt(2.0) / K * abs(s0)
    if s0 == 0.0:
        t_reach = 0.0
    else:
        crossing = np.where(np.sign(sig) != np.sign(s0))[0]
        if crossing.size == 0:
            raise NoReaching(
                f"sigma(0)={s0:.6g} never crossed zero within the horizon "
                f"{t[-1]:.6g}s (bound {bound2:.6g}s)")
        t_reach = float(t[crossing[0]])
    ok = t_reach <= bound2
    check = CheckResult(
        "smc_reaching_time", "PASS" if ok else "FAIL",
        "t_reach <= (2/K)*|sigma(0)|", t_reach - bound2, t_reach, 0.0,
        detail=(f"t_reach={t_reach:.6g}s stated_bound={bound2:.6g}s "
                f"derived_bound={bound_r2:.6g}s "
                f"observed_factor={t_reach * K / abs(s0) if s0 else 0.0:.4g}"))
    return t_reach, bound2, bound_r2, check


def audit_network_lyapunov(trajs, adjacency, window_s: float | None = None) -> CheckResult:
    """Window-over-window decrease of the aggregate tracking potential.

    W = 1^T (I + L) V with V_i = |y_z,i - y_ref,i| for controlled components
    (black-box components carry no potential).  PASS iff no window increases
    W beyond tolerance, comparing short averages at window edges (averaging
    spans the first/last 5% of each window so switching chatter does not
    alias the comparison).

    The aggregate of the per-component storage inequalities telescopes to
    this decrease when each component's feed-forward containment holds; the
    tracking potentials are the per-component Lyapunov certificates.
    """
    trajs = list(trajs)
    adjacency = np.asarray(adjacency, dtype=float)
    n = adjacency.shape[0]
    weights = np.ones(n) @ (np.eye(n) + adjacency)
    base = trajs[0]
    t = base.t
    if window_s is None:
        window_s = float(base.meta.get("window_s", 1.0))
    n_win = max(1, int(math.floor((float(t[-1]) + 1e-12) / window_s)))
    V = np.zeros_like(t)
    scale = 0.0
    for w, tr in zip(weights, trajs):
        if tr is None or len(tr) == 0:
            continue
        V = V + w * np.abs(tr.sigma)
        scale = max(scale, float(np.max(np.abs(tr.y_z))))
    tol = 1e-3 * max(scale, 1e-30)
    worst, t_w = -math.inf, 0.0
    edge = 0.05 * window_s
    for k in range(n_win):
        a, b = k * window_s, (k + 1) * window_s
        m0 = (t >= a) & (t < a + edge)
        m1 = (t >= b - edge) & (t < b)
        if not m0.any() or not m1.any():
            continue
        dV = float(np.mean(V[m1]) - np.mean(V[m0]))
        if dV > worst:
            worst, t_w = dV, b
    ok = worst <= tol
    return CheckResult(
        "network_lyapunov_decrease", "PASS" if ok else "FAIL",
        "W(window end) <= W(window start), W = 1^T(I+L)V, V_i = |y_z - y_ref|",
        worst, t_w, tol, detail=f"windows={n_win}")


def audit_tellegen(traj) -> CheckResult:
    """Junction consistency: outgoing rates of the two components cancel."""
    if len(traj) == 0:
        return CheckResult("tellegen_junction", "SKIP", "", 0.0, 0.0, 0.0)
    p_sum = np.abs(traj.P_out_src + traj.P_out_load)
    q_sum = np.abs(traj.Qd_out_src + traj.Qd_out_load)
    p_peak = max(float(np.max(np.abs(traj.P_out_src))), 1e-30)
    q_peak = max(float(np.max(np.abs(traj.Qd_out_src))), 1e-30)
    rel = np.maximum(p_sum / p_peak, q_sum / q_peak)
    tol = 1e-6
    worst, t_w, ok = _worst(rel, traj.t, tol)
    return CheckResult(
        "tellegen_junction", "PASS" if ok else "FAIL",
        "|P_out_1 + P_out_2| and |Qd_out_1 + Qd_out_2| <= 1e-6 of peaks",
        worst, t_w, tol)


@dataclass(frozen=True)
class Metrics:
    settling_time: float
    overshoot: float
    rms_tracking_error: float
    max_du_dt: float
    settled: bool


def metrics(traj, band: float = 0.02, signal: str = "v") -> Metrics:
    """Step-response metrics over a recorded run.

    Settling: first time after which the signal stays within
    band * |final - initial| of its final value (a constant signal settles
    at t = 0); never entering the band within the horizon reports the
    horizon with settled=False.  Overshoot: peak excursion past the final
    value as a fraction of the step size.  RMS error is on y_z - y_ref;
    max |du/dt| uses the peak-held rate column (full-rate peaks).
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    y = traj.column(signal)
    t = traj.t
    y0, yf = float(y[0]), float(y[-1])
    step = abs(yf - y0)
    tolband = band * (step if step > 0 else max(abs(yf), 1.0))
    dev = np.abs(y - yf)
    outside = dev > tolband
    span = float(t[-1] - t[0]) if len(t) > 1 else 0.0
    if not outside.any():
        settle, settled = 0.0, True
    elif outside[-1] or (span > 0.0
                         and float(t[np.where(outside)[0][-1]]) > t[0] + 0.9 * span):
        # still leaving the band in the final tenth of the horizon: no dwell
        settle, settled = float(t[-1]), False
    else:
        last_out = int(np.where(outside)[0][-1])
        settle, settled = float(t[last_out + 1]), True
    if step > 0:
        signed = (y - yf) * math.copysign(1.0, yf - y0)
        overshoot = max(0.0, float(np.max(signed)) / step)
    else:
        overshoot = 0.0
    err = traj.y_z - traj.y_ref
    rms = float(np.sqrt(np.mean(err * err)))
    max_du = float(np.max(traj.du_dt_peak))
    return Metrics(settle, overshoot, rms, max_du, settled)


def run_audits(result, scenario, schedule: RangeSchedule | None = None) -> AuditReport:
    """Standard audit bundle for one run (used by the CLI and tests)."""
    traj = result.trajectory
    report = AuditReport()
    if len(traj) == 0:
        return report
    report.add(audit_tellegen(traj))
    report.add(audit_dissipativity(traj))
    if scenario.controller == "fblc":
        report.add(audit_fblc_stability(traj))
    if scenario.controller == "smc":
        try:
            _, _, _, check = audit_smc_reaching(traj, scenario.smc)
            report.add(check)
        except NoReaching as exc:
            report.add(CheckResult("smc_reaching_time", "FAIL",
                                   "t_reach <= (2/K)*|sigma(0)|",
                                   math.inf, float(traj.t[-1]), 0.0, str(exc)))
    if schedule is not None:
        vio = detect_violation(traj, schedule)
        report.add(CheckResult(
            "feasibility_containment", "PASS" if vio is None else "FAIL",
            "source outgoing rate inside per-window incoming box",
            0.0 if vio is None else
            max(vio.bound_lo - vio.value, vio.value - vio.bound_hi),
            0.0 if vio is None else vio.time, 0.0,
            detail="" if vio is None else
            f"axis={vio.axis} window={vio.window} value={vio.value:.6g} "
            f"box=[{vio.bound_lo:.6g},{vio.bound_hi:.6g}]"))
        report.add(audit_network_lyapunov(
            [traj, None], np.array([[0.0, 1.0], [1.0, 0.0]]),
            window_s=schedule.window_s))
    return report
