"""Controllers: energy-space tracking laws and the two benchmark laws.

Energy-space laws command a reactive-power rate u_z and are lowered onto
the physical source voltage through the dynamic control lift

    du/dt = (u / i_port) di_port/dt - u_z / i_port,

so that the reactive rate actually injected at the control port equals the
command: u di/dt - du/dt i = u_z.  The lift needs a nonzero port current.

Reference generation: with the plain power-tracking objective the target is
the incoming port power (and its rate); with the regulation objective the
target is scaled by v_ref/v so the terminal voltage is driven to v_ref.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EPS_DIV, DegenerateState, DegenerateControlPort
from .energy import InteractionRate
from .components import RlcParams


@dataclass(frozen=True)
class ReferenceCommand:
    """Energy-output setpoint y_ref [W] and its rate dy_ref [W/s]."""

    y_ref: float
    dy_ref: float


@dataclass(frozen=True)
class FblcConfig:
    """Feedback-linearizing tracking law u_z = -eta_hat - K e + dy_ref.

    K > 0 [1/s] sets the error decay rate.  eta_error is an additive model
    of the estimation error on eta_hat: ('none' | 'const', value |
    'scaled', c) where scaled injects c * K * |e|.
    """

    K: float = 100.0
    eta_error: tuple = ("none",)

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("tracking gain K must be positive")

    def eta_error_value(self, e: float) -> float:
        kind = self.eta_error[0]
        if kind == "none":
            return 0.0
        if kind == "const":
            return float(self.eta_error[1])
        if kind == "scaled":
            return float(self.eta_error[1]) * self.K * abs(e)
        raise ValueError(f"unknown eta_error model {self.eta_error!r}")


@dataclass(frozen=True)
class SmcConfig:
    """Switching law u_z = -(L_bar + K) sign(e) + dy_ref.

    L_bar bounds the residual nonlinearity |eta - 4 Et| the switching must
    dominate; K > 0 is the reaching-rate margin, alpha = L_bar + K the
    switching gain.  boundary_layer > 0 replaces sign by saturation
    sat(e / boundary_layer); 0 keeps pure switching.
    """

    L_bar: float = 0.0
    K: float = 100.0
    boundary_layer: float = 0.0

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("reaching gain K must be positive")
        if self.L_bar < 0 or self.boundary_layer < 0:
            raise ValueError("L_bar and boundary_layer must be nonnegative")

    @property
    def alpha(self) -> float:
        return self.L_bar + self.K


@dataclass(frozen=True)
class ConstantGainConfig:
    """Static proportional law u = u_ref - K1 i - K2 (v - v_ref).

    Defaults are the LQR-tuned gains of the case study; u_ref is the
    consistent equilibrium input v_ref + R P_nom / v_ref.
    """

    K1: float = 0.4512
    K2: float = 0.45
    u_ref: float = 80.15
    v_ref: float = 80.0

    @classmethod
    def for_operating_point(cls, params: RlcParams, P_nominal: float,
                            v_ref: float = 80.0, K1: float = 0.4512,
                            K2: float = 0.45) -> "ConstantGainConfig":
        return cls(K1=K1, K2=K2, v_ref=v_ref,
                   u_ref=v_ref + params.R * P_nominal / v_ref)


@dataclass(frozen=True)
class BraytonMoserConfig:
    """Nonlinear voltage-regulation benchmark with adaptive damping.

    u = R i + v_ref - L (Pi / v^2 + K3) dv/dt - (K1 (v - v_ref) + K2 dv/dt).
    Pi is an upper bound on the served load power; K3 > 0.  Stable for
    v_ref > 0 and loads below Pi.  Note K2 also multiplies the fast voltage
    derivative: with dt = 1e-5 s the fixed-step integrator bounds the usable
    K2 below about 2.
    """

    K1: float = 5.0
    K2: float = 1.5
    K3: float = 1.0
    Pi: float = 1700.0

    def __post_init__(self):
        if self.K3 <= 0 or self.Pi <= 0:
            raise ValueError("K3 and Pi must be positive")


def reference_map(incoming: InteractionRate, dy_ref: float = 0.0) -> ReferenceCommand:
    """Power-tracking reference: y_ref = incoming port power.

    The reference rate is not part of the incoming pair; pass a causal
    estimate (see RateEstimator) or an analytic value.
    """
    return ReferenceCommand(incoming.power, dy_ref)


class RateEstimator:
    """Two-point backward difference with the first sample's rate at zero.

    Causal estimate of a reference rate when no analytic form is available;
    sample it at the controller interval.
    """

    def __init__(self):
        self._prev_t = None
        self._prev_y = None

    def update(self, t: float, y: float) -> float:
        if self._prev_t is None or t <= self._prev_t:
            rate = 0.0
        else:
            rate = (y - self._prev_y) / (t - self._prev_t)
        self._prev_t, self._prev_y = t, y
        return rate


def regulation_reference(incoming: InteractionRate, incoming_power_rate: float,
                         y: float, ydot: float, y_ref_phys: float) -> ReferenceCommand:
    """Reference retargeted to regulate a terminal variable y to y_ref_phys.

        y_ref  = P_in * (y_ref_phys / y)
        dy_ref = Pdot_in * (y_ref_phys / y) - P_in * (y_ref_phys / y^2) ydot

    For the RLC source, y is the terminal voltage.  Requires |y| above the
    division guard.
    """
    if abs(y) <= EPS_DIV:
        raise DegenerateState(f"regulated variable |y|={abs(y):.3e} at the guard")
    ratio = y_ref_phys / y
    p_in = incoming.power
    return ReferenceCommand(p_in * ratio,
                            incoming_power_rate * ratio - p_in * ratio / y * ydot)


def fblc_energy_control(cfg: FblcConfig, eta_hat: float, y_z: float,
                        ref: ReferenceCommand) -> float:
    """u_z = -eta_hat - K (y_z - y_ref) + dy_ref."""
    return -eta_hat - cfg.K * (y_z - ref.y_ref) + ref.dy_ref


def smc_energy_control(cfg: SmcConfig, y_z: float, ref: ReferenceCommand) -> float:
    """u_z = -alpha * sign(e) + dy_ref, with sign(0) = 0.

    With a boundary layer the sign is replaced by saturation of
    e / boundary_layer to [-1, 1].
    """
    e = y_z - ref.y_ref
    if cfg.boundary_layer > 0.0:
        s = max(-1.0, min(1.0, e / cfg.boundary_layer))
    else:
        s = 0.0 if e == 0.0 else math.copysign(1.0, e)
    return -cfg.alpha * s + ref.dy_ref


def control_lift(u: float, i_port: float, di_port: float, u_z: float) -> float:
    """du/dt realizing the reactive-rate command u_z at the control port.

    Raises DegenerateControlPort when |i_port| is at the division guard.
    """
    if abs(i_port) <= EPS_DIV:
        raise DegenerateControlPort(
            f"control-port current |i|={abs(i_port):.3e} A at the guard")
    return (u / i_port) * di_port - u_z / i_port


def constant_gain_control(cfg: ConstantGainConfig, i: float, v: float) -> float:
    """Static proportional law; returns the source voltage u."""
    return cfg.u_ref - cfg.K1 * i - cfg.K2 * (v - cfg.v_ref)


def brayton_moser_control(cfg: BraytonMoserConfig, params: RlcParams,
                          i: float, v: float, dv: float, v_ref: float) -> float:
    """Nonlinear benchmark law; returns the source voltage u."""
    if abs(v) <= EPS_DIV:
        raise DegenerateState(f"terminal voltage |v|={abs(v):.3e} V at the guard")
    return (params.R * i + v_ref
            - params.L * (cfg.Pi / (v * v) + cfg.K3) * dv
            - (cfg.K1 * (v - v_ref) + cfg.K2 * dv))


def brayton_moser_control_rate(cfg: BraytonMoserConfig, params: RlcParams,
                               i: float, v: float, di: float, dv: float,
                               ddv: float) -> float:
    """Analytic du/dt of the benchmark law along a trajectory.

    Needs the second voltage derivative ddv, available from the plant model.
    """
    gain = cfg.Pi / (v * v) + cfg.K3
    dgain = -2.0 * cfg.Pi / (v * v * v) * dv
    return (params.R * di
            - params.L * (dgain * dv + gain * ddv)
            - (cfg.K1 * dv + cfg.K2 * ddv))
