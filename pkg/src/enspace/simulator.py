"""Fixed-step closed-loop simulation of the source/load interconnection.

Classical RK4 over the joint state: (i, v, u) when the source voltage is a
dynamic control state (energy controllers), (i, v) with u algebraic for the
static benchmark laws.  Controllers are evaluated at every RK4 substage as
pure state maps (the continuous-time idealization).  Integration steps are
split at load-profile breakpoints so that jumps and slope corners land on
step boundaries.

Interaction-rate bookkeeping records two outgoing series for the source:

* the port-measured form (effort v, flow out of the node), which is the
  exact negative of the load's absorption and is what junction equalities,
  the feasibility scan, and the Tellegen audit use;
* the balance-sheet form assembled from the component's own energy
  quantities (energy rate, decay, port powers), which is what the linear
  energy-space model reproduces identically and what the model-residual
  check uses.

The two agree at steady state; along transients the balance-sheet reactive
row differs by internal reshuffling terms, which is why both are kept.

Trajectory CSV column order is ``Trajectory.COLUMNS``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EPS_DIV, DegenerateState, SimulationAborted
from .energy import (InteractionRate, stored_energy, tangent_energy, dissipation)
from .components import (RlcParams, RlcState, LoadProfile, DisturbanceProfile,
                         rlc_state_derivative, rlc_energy_output, rlc_eta,
                         rlc_eta_normal_form, cpl_incoming_rate)
from .controllers import (FblcConfig, SmcConfig, ConstantGainConfig,
                          BraytonMoserConfig, ReferenceCommand,
                          regulation_reference, reference_map,
                          fblc_energy_control, smc_energy_control, control_lift,
                          constant_gain_control, brayton_moser_control,
                          brayton_moser_control_rate)

ENERGY_CONTROLLERS = ("fblc", "smc")
STATIC_CONTROLLERS = ("constant_gain", "brayton_moser")


@dataclass(frozen=True)
class EnergyMatrices:
    """Matrices of the linear energy-space model for a given time constant.

    x_z = [E, p];  d/dt x_z = A_z x_z + B_t Et + B_z (rate_out + rate_u + rate_m);
    y_z = C_z x_z + D_z (rate_u + rate_m).  B_t, B_z, D_z are constant; A_z
    and C_z carry the live 1/tau.
    """

    tau: float

    @property
    def A_z(self) -> np.ndarray:
        return np.array([[-1.0 / self.tau, 0.0], [0.0, 0.0]])

    @property
    def C_z(self) -> np.ndarray:
        return np.array([1.0 / self.tau, 0.0])

    B_t = np.array([0.0, 4.0])
    B_z = np.array([1.0, -1.0])
    D_z = np.array([-1.0, 0.0])


@dataclass(frozen=True)
class Scenario:
    """Everything one closed-loop run needs."""

    params: RlcParams
    load: LoadProfile
    controller: str
    fblc: FblcConfig = FblcConfig()
    smc: SmcConfig = SmcConfig(L_bar=2.0e4)
    constant_gain: ConstantGainConfig = ConstantGainConfig()
    brayton_moser: BraytonMoserConfig = BraytonMoserConfig()
    objective: str = "regulation"
    v_ref: float = 80.0
    matched: DisturbanceProfile = DisturbanceProfile()
    initial: object = "equilibrium"
    t_end: float = 1.0
    dt: float = 1e-5
    window_s: float = 1.0
    record_decimation: int = 100
    controller_R: float | None = None
    controller_L: float | None = None
    controller_C: float | None = None
    name: str = "scenario"

    def __post_init__(self):
        if self.controller not in ENERGY_CONTROLLERS + STATIC_CONTROLLERS:
            raise ValueError(f"unknown controller {self.controller!r}")
        if self.objective not in ("regulation", "tracking"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.dt <= 0 or self.window_s < self.dt:
            raise ValueError("need dt > 0 and window_s >= dt")
        if self.t_end != 0.0 and self.t_end < self.dt:
            raise ValueError("t_end must be 0 (empty run) or >= dt")
        if self.record_decimation < 1:
            raise ValueError("record_decimation must be >= 1")

    @property
    def ctrl_R(self) -> float:
        """Resistance value the controller believes in (robustness knob)."""
        return self.params.R if self.controller_R is None else self.controller_R

    @property
    def ctrl_params(self) -> RlcParams:
        """Parameter set as the controller believes it (robustness knobs)."""
        return RlcParams(
            self.params.R if self.controller_R is None else self.controller_R,
            self.params.L if self.controller_L is None else self.controller_L,
            self.params.C if self.controller_C is None else self.controller_C)

    def initial_state(self) -> RlcState:
        """Resolve the initial conditions.

        'paper'        -> i = 1 A, v = 80 V, u = v + R i
        'equilibrium'  -> closed-loop equilibrium for the load power at t = 0
        (i, v[, u])    -> explicit values; u defaults to v + R i
        """
        if self.initial == "paper":
            i0, v0 = 1.0, 80.0
            return RlcState(i0, v0, v0 + self.params.R * i0)
        if self.initial == "equilibrium":
            return self.equilibrium_state()
        vals = tuple(float(x) for x in self.initial)
        if len(vals) == 2:
            i0, v0 = vals
            return RlcState(i0, v0, v0 + self.params.R * i0)
        i0, v0, u0 = vals
        return RlcState(i0, v0, u0)

    def equilibrium_state(self, P: float | None = None) -> RlcState:
        """Closed-loop equilibrium for load power P (default: load at t=0).

        Energy controllers and the nonlinear benchmark regulate v to v_ref
        exactly; the proportional law settles where its static droop puts it.
        """
        if P is None:
            P = self.load.evaluate(self.load.times[0])[0]
        R = self.params.R
        if self.controller == "constant_gain":
            cfg = self.constant_gain
            # v (1 + K2) + (R + K1) P / v = u_ref + K2 v_ref, larger root
            a, b, c = 1.0 + cfg.K2, -(cfg.u_ref + cfg.K2 * cfg.v_ref), (R + cfg.K1) * P
            disc = b * b - 4.0 * a * c
            if disc <= 0.0:
                raise DegenerateState("no proportional-law equilibrium for this load")
            v = (-b + math.sqrt(disc)) / (2.0 * a)
            i = P / v
            return RlcState(i, v, v + R * i)
        i = P / self.v_ref
        return RlcState(i, self.v_ref, self.v_ref + R * i)


class Trajectory:
    """Uniformly sampled run record; one numpy array per column."""

    COLUMNS = (
        "t", "i", "v", "u", "du_dt", "du_dt_peak", "u_z_cmd", "q_ctrl_rate",
        "P_load", "Pdot_load", "P_mm",
        "y_z", "y_ref", "dy_ref", "sigma", "dy_z",
        "E", "p", "pdot", "E_t", "tau", "D",
        "P_out_src", "Qd_out_src", "Qd_out_src_energy", "P_in_src", "Qd_in_src",
        "P_out_load", "Qd_out_load", "P_in_load", "Qd_in_load",
        "eta", "eta_nf", "eta_hat", "eta_tilde",
    )

    def __init__(self, rows, meta):
        data = np.asarray(rows, dtype=float)
        if data.size == 0:
            data = data.reshape(0, len(self.COLUMNS))
        if data.shape[1] != len(self.COLUMNS):
            raise ValueError("row width does not match column schema")
        self._data = data
        self.meta = dict(meta)

    def __len__(self):
        return self._data.shape[0]

    def __getattr__(self, name):
        try:
            idx = self.COLUMNS.index(name)
        except ValueError:
            raise AttributeError(name) from None
        return self._data[:, idx]

    def column(self, name: str) -> np.ndarray:
        return self._data[:, self.COLUMNS.index(name)]

    @property
    def sample_dt(self) -> float:
        t = self.column("t")
        return float(t[1] - t[0]) if len(t) > 1 else 0.0

    def to_csv(self, path, report_lines=()) -> None:
        """Write the trajectory; report key=value pairs go into '#' headers."""
        with open(path, "w", newline="") as fh:
            for key, val in self.meta.items():
                fh.write(f"# {key}={val}\n")
            for line in report_lines:
                fh.write(f"# {line}\n")
            fh.write(",".join(self.COLUMNS) + "\n")
            np.savetxt(fh, self._data, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        meta = {}
        with open(path) as fh:
            text = fh.readlines()
        body = []
        header = None
        for line in text:
            if line.startswith("#"):
                stripped = line[1:].strip()
                if "=" in stripped:
                    key, val = stripped.split("=", 1)
                    meta[key.strip()] = val.strip()
                continue
            if header is None:
                header = [c.strip() for c in line.strip().split(",")]
                continue
            body.append(line)
        if header is None or tuple(header) != cls.COLUMNS:
            raise ValueError(f"{path}: unexpected column header")
        data = np.loadtxt(io.StringIO("".join(body)), delimiter=",", ndmin=2) \
            if body else np.empty((0, len(cls.COLUMNS)))
        return cls(data, meta)


@dataclass
class RunResult:
    """Trajectory plus completion status of one run."""

    trajectory: Trajectory
    completed: bool
    abort_time: float | None = None
    abort_reason: str | None = None


class _Loop:
    """Internal closed-loop right-hand side and bookkeeping for one run."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.params = sc.params
        self.cparams = sc.ctrl_params
        self.Rc = sc.ctrl_R
        self.model = sc.params.energy_model()
        self.dynamic = sc.controller in ENERGY_CONTROLLERS

    # -- shared plant-side quantities -------------------------------------
    #
    # During integration of one sub-step the load is evaluated on the active
    # linear segment (set by use_segment); sub-steps never straddle a
    # breakpoint, so substages at the segment's right edge keep the
    # segment's own value rather than sampling past a jump.

    _segment = None

    def use_segment(self, a, b):
        mid = 0.5 * (a + b)
        P_mid, slope = self.sc.load.evaluate(mid)
        self._segment = (mid, P_mid, slope)

    def clear_segment(self):
        self._segment = None

    def _load_at(self, t):
        if self._segment is None:
            return self.sc.load.evaluate(t)
        t0, P0, slope = self._segment
        return P0 + slope * (t - t0), slope

    def _plant(self, t, i, v, u):
        P_l, dPl = self._load_at(t)
        P_mm, _ = self.sc.matched.evaluate(t)
        st = RlcState(i, v, u)
        di, dv = rlc_state_derivative(st, self.params, P_mm, -P_l)
        return st, P_l, dPl, P_mm, di, dv

    def _reference(self, P_l, dPl, v, dv):
        incoming = InteractionRate(-P_l, 0.0)  # reactive row not used here
        if self.sc.objective == "regulation":
            return regulation_reference(incoming, -dPl, v, dv, self.sc.v_ref)
        return reference_map(incoming, dy_ref=-dPl)

    def _control_rate(self, t, i, v, u):
        """u_z and du/dt for the energy controllers (any substage)."""
        st, P_l, dPl, P_mm, di, dv = self._plant(t, i, v, u)
        ref = self._reference(P_l, dPl, v, dv)
        y_z_c = rlc_energy_output(st, self.cparams, P_mm)
        e = y_z_c - ref.y_ref
        if self.sc.controller == "fblc":
            eta_nf_c = rlc_eta_normal_form(st, di, dv, self.cparams)
            eta_tilde = self.sc.fblc.eta_error_value(e)
            u_z = fblc_energy_control(self.sc.fblc, eta_nf_c + eta_tilde, y_z_c, ref)
        else:
            eta_tilde = 0.0
            u_z = smc_energy_control(self.sc.smc, y_z_c, ref)
        du = control_lift(u, i, di, u_z)
        return di, dv, du, u_z, e, ref, eta_tilde

    def _static_u(self, t, i, v):
        P_l, dPl = self._load_at(t)
        if self.sc.controller == "constant_gain":
            return constant_gain_control(self.sc.constant_gain, i, v)
        dv = (i - P_l / v) / self.params.C if abs(v) > EPS_DIV else 0.0
        return brayton_moser_control(self.sc.brayton_moser, self.cparams,
                                     i, v, dv, self.sc.v_ref)

    # -- RK4 drivers -------------------------------------------------------

    def rk4_dynamic(self, t, i, v, u, h):
        def f(tt, ii, vv, uu):
            d = self._control_rate(tt, ii, vv, uu)
            return d[0], d[1], d[2]
        k1 = f(t, i, v, u)
        k2 = f(t + h / 2, i + h / 2 * k1[0], v + h / 2 * k1[1], u + h / 2 * k1[2])
        k3 = f(t + h / 2, i + h / 2 * k2[0], v + h / 2 * k2[1], u + h / 2 * k2[2])
        k4 = f(t + h, i + h * k3[0], v + h * k3[1], u + h * k3[2])
        return (i + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                v + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
                u + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]))

    def rk4_static(self, t, i, v, h):
        def f(tt, ii, vv):
            uu = self._static_u(tt, ii, vv)
            _, P_l, _, P_mm, di, dv = self._plant(tt, ii, vv, uu)
            return di, dv
        k1 = f(t, i, v)
        k2 = f(t + h / 2, i + h / 2 * k1[0], v + h / 2 * k1[1])
        k3 = f(t + h / 2, i + h / 2 * k2[0], v + h / 2 * k2[1])
        k4 = f(t + h, i + h * k3[0], v + h * k3[1])
        return (i + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
                v + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]))

    # -- per-sample bookkeeping --------------------------------------------

    def row(self, t, i, v, u, du, du_peak, u_z_cmd, eta_tilde_cfg):
        st, P_l, dPl, P_mm, di, dv = self._plant(t, i, v, u)
        params, Rc = self.params, self.Rc
        x = np.array([i, v])
        xd = np.array([di, dv])
        E = stored_energy(x, self.model)
        Et = tangent_energy(xd, self.model)
        D = dissipation(x, self.model)
        tau = E / D if D > EPS_DIV else math.inf
        p = u * i - params.R * i * i + P_mm - P_l
        pdot = du * i + u * di - 2.0 * params.R * i * di - dPl
        q_ctrl = u * di - du * i
        y_z = rlc_energy_output(st, params, P_mm)
        ref = self._reference(P_l, dPl, v, dv)
        y_z_c = rlc_energy_output(st, self.cparams, P_mm)
        sigma = y_z_c - ref.y_ref
        dy_z = 2.0 * params.R * i * di - u * di - du * i
        # load side: port absorption; source port series is its exact negative
        in_src = cpl_incoming_rate(P_l, dPl, v, dv)
        out_load = -in_src
        out_src_port = in_src   # effort v, flow out of the node
        qd_out_energy = (-pdot + 4.0 * Et - q_ctrl - 0.0)
        p_out_src = p + D - (u * i) - P_mm
        in_load = InteractionRate(-p_out_src, -out_src_port.reactive_rate)
        eta_full = rlc_eta(st, di, dv, params, P_l / v, dPl / v - (P_l / (v * v)) * dv)
        eta_nf = rlc_eta_normal_form(st, di, dv, params)
        eta_nf_c = rlc_eta_normal_form(st, di, dv, self.cparams)
        eta_hat = eta_nf_c + eta_tilde_cfg if self.sc.controller == "fblc" else math.nan
        eta_tilde = eta_nf - eta_hat if self.sc.controller == "fblc" else math.nan
        return (t, i, v, u, du, du_peak, u_z_cmd, q_ctrl,
                P_l, dPl, P_mm,
                y_z, ref.y_ref, ref.dy_ref, sigma, dy_z,
                E, p, pdot, Et, tau, D,
                p_out_src, out_src_port.reactive_rate, qd_out_energy,
                in_src.power, in_src.reactive_rate,
                out_load.power, out_load.reactive_rate,
                in_load.power, in_load.reactive_rate,
                eta_full, eta_nf, eta_hat, eta_tilde)


def run(scenario: Scenario) -> RunResult:
    """Integrate the scenario; return the trajectory and completion status.

    Guard violations (division guards, non-finite state) abort the run and
    are reported in the result; for deliberately unstable scenarios the
    abort is the observable outcome.  A zero-step horizon returns an empty
    trajectory.
    """
    sc = scenario
    loop = _Loop(sc)
    n = int(round(sc.t_end / sc.dt))
    meta = {
        "scenario": sc.name, "controller": sc.controller,
        "objective": sc.objective, "dt": sc.dt,
        "record_decimation": sc.record_decimation, "v_ref": sc.v_ref,
        "window_s": sc.window_s,
        "gain_K": sc.fblc.K if sc.controller == "fblc" else sc.smc.K,
        "smc_alpha": sc.smc.alpha if sc.controller == "smc" else "",
        "controller_R": sc.ctrl_R, "plant_R": sc.params.R,
        "L": sc.params.L, "C": sc.params.C,
    }
    if n == 0:
        return RunResult(Trajectory([], meta), True)

    st0 = sc.initial_state()
    i, v, u = st0.i, st0.v, st0.u
    rows = []
    du_peak = 0.0
    abort = None

    for k in range(n + 1):
        t = k * sc.dt
        try:
            if loop.dynamic:
                di, dv, du, u_z, e, ref, eta_t = loop._control_rate(t, i, v, u)
            else:
                u = loop._static_u(t, i, v)
                stq, P_l, dPl, P_mm, di, dv = loop._plant(t, i, v, u)
                u_z, eta_t = math.nan, 0.0
                if sc.controller == "constant_gain":
                    cfg = sc.constant_gain
                    du = -cfg.K1 * di - cfg.K2 * dv
                else:
                    ddv = (di + (-dPl) / v - (-P_l / (v * v)) * dv) / sc.params.C
                    du = brayton_moser_control_rate(
                        sc.brayton_moser, loop.cparams, i, v, di, dv, ddv)
            du_peak = max(du_peak, abs(du))
            if k % sc.record_decimation == 0 or k == n:
                with np.errstate(over="ignore", invalid="ignore"):
                    rows.append(loop.row(t, i, v, u, du, du_peak, u_z, eta_t))
                du_peak = 0.0
            if k == n:
                break
            # split the step at any load breakpoints it straddles; each
            # sub-step integrates on one linear load segment
            t_next = (k + 1) * sc.dt
            cuts = sc.load.breakpoints_between(t, t_next)
            tt, ii, vv, uu = t, i, v, u
            for tb in cuts + [t_next]:
                h = tb - tt
                if h <= 0.0:
                    continue
                loop.use_segment(tt, tb)
                if loop.dynamic:
                    ii, vv, uu = loop.rk4_dynamic(tt, ii, vv, uu, h)
                else:
                    ii, vv = loop.rk4_static(tt, ii, vv, h)
                tt = tb
            loop.clear_segment()
            i, v, u = ii, vv, uu
            if not (math.isfinite(i) and math.isfinite(v) and math.isfinite(u)):
                raise DegenerateState("state no longer finite")
            if v <= EPS_DIV:
                raise DegenerateState(f"terminal voltage collapsed (v={v:.3e} V)")
        except Exception as exc:  # guard errors end the run with diagnostics
            abort = SimulationAborted(t, f"{type(exc).__name__}: {exc}",
                                      state=(i, v, u))
            break

    traj = Trajectory(rows, meta)
    if abort is not None:
        return RunResult(traj, False, abort.t, str(abort))
    return RunResult(traj, True)


def energy_trajectory_residual(traj: Trajectory):
    """Max defect of the linear energy-space model along a recorded run.

    Row 1: finite-differenced dE/dt against
           -E/tau + (P_out + P_u + P_m)  (the balance-sheet rates).
    Row 2: finite-differenced dp/dt against
           4 Et - (Qd_out + Qd_u + Qd_m).
    Returns (max |row1| [W], max |row2| [W/s]).  Needs >= 3 samples and a
    recording interval that resolves the trajectory's content.
    """
    if len(traj) < 5:
        raise ValueError("need at least 5 samples")
    t = traj.t
    h = float(t[1] - t[0])
    E, p = traj.E, traj.p
    P_u = traj.u * traj.i
    rhs1 = -traj.D + (traj.P_out_src + P_u + traj.P_mm)
    rhs2 = 4.0 * traj.E_t - (traj.Qd_out_src_energy + traj.q_ctrl_rate + 0.0)

    def d4(f):  # 4th-order central first derivative on the interior
        return (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)

    r1 = np.abs(d4(E) - rhs1[2:-2])
    r2 = np.abs(d4(p) - rhs2[2:-2])
    return float(np.max(r1)), float(np.max(r2))
