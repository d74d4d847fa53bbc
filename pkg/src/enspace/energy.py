"""Energy-space quantities and the interaction-variable algebra.

Everything downstream (components, controllers, simulator, audits) computes
through the handful of scalar maps in this module:

* instantaneous power         P  = e * f                       [W]
* reactive power rate         Qd = e * df/dt - f * de/dt       [W/s]
* stored energy               E  = 1/2 x^T H x                 [J]
* tangent-space energy        Et = 1/2 xd^T H xd
* dissipation                 D  = x^T B x                     [W]
* time constant               tau = E / D                      [s]

and the outgoing interaction rate, the pair

    P_out  =  p + E/tau - P_u - P_m
    Qd_out = -pd + 4 Et - Qd_u - Qd_m

whose time integral is the interaction variable.  The E/tau term is always
evaluated as D(x) directly, which is the same number whenever tau is defined
and stays finite when dissipation vanishes.

Units are SI throughout.  No unit-carrying types; fields document units.
All functions are pure and safe to call concurrently.

Note on Q: only the rate Qd is defined; integration starts at 0 by
convention, so only differences of the accumulated reactive variable are
meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EPS_DIV, DegenerateDissipation


@dataclass(frozen=True)
class PortSignal:
    """Effort/flow pair and rates at one port.

    effort      [V]    effort_rate [V/s]
    flow        [A]    flow_rate   [A/s]

    At the control port the effort is the applied source voltage and the
    flow is the port current (the dual variable of the control input).
    """

    effort: float
    flow: float
    effort_rate: float = 0.0
    flow_rate: float = 0.0

    def swapped(self) -> "PortSignal":
        """Same port with effort and flow roles exchanged."""
        return PortSignal(self.flow, self.effort, self.flow_rate, self.effort_rate)


@dataclass(frozen=True)
class QuadraticEnergyModel:
    """Constant inertia matrix H (SPD) and dissipation matrix B (PSD).

    State-dependent H(x)/B(x) are out of scope: every shipped component has
    constant matrices.
    """

    inertia: np.ndarray
    dissipation: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.inertia, dtype=float)
        B = np.asarray(self.dissipation, dtype=float)
        object.__setattr__(self, "inertia", H)
        object.__setattr__(self, "dissipation", B)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("inertia matrix must be square")
        if B.shape != H.shape:
            raise ValueError("dissipation matrix shape must match inertia")
        if not np.allclose(H, H.T):
            raise ValueError("inertia matrix must be symmetric")
        if not np.allclose(B, B.T):
            raise ValueError("dissipation matrix must be symmetric")
        if np.any(np.linalg.eigvalsh(H) <= 0.0):
            raise ValueError("inertia matrix must be positive definite")
        if np.any(np.linalg.eigvalsh(B) < -1e-12):
            raise ValueError("dissipation matrix must be positive semidefinite")

    @property
    def dim(self) -> int:
        return self.inertia.shape[0]


@dataclass(frozen=True)
class EnergyState:
    """Energy-space state of one component at one instant.

    stored_energy  E   [J]    >= 0
    energy_rate    p   [W]    (dE/dt)
    tangent_energy Et          >= 0 (enters the dynamics as 4*Et)
    time_constant  tau [s]    E/D; +inf when dissipation is zero
    """

    stored_energy: float
    energy_rate: float
    tangent_energy: float
    time_constant: float


@dataclass(frozen=True)
class InteractionRate:
    """Rate of the interaction variable: (power, reactive power rate).

    Sign convention: positive means flowing into the port the instance is
    named for; callers never flip signs inside this type.
    """

    power: float
    reactive_rate: float

    def __neg__(self) -> "InteractionRate":
        return InteractionRate(-self.power, -self.reactive_rate)

    def as_tuple(self):
        return (self.power, self.reactive_rate)


@dataclass(frozen=True)
class InteractionVariable:
    """Accumulated interaction variable: time integral of an InteractionRate.

    accumulated = (energy [J], reactive var [W]); zero at t = 0.
    """

    accumulated: tuple


def instantaneous_power(sig: PortSignal) -> float:
    """Port power e*f [W]."""
    return sig.effort * sig.flow


def reactive_power_rate(sig: PortSignal) -> float:
    """Generalized reactive power rate e*fd - f*ed [W/s].

    Zero for a frozen port (both rates zero); antisymmetric under
    effort/flow exchange.
    """
    return sig.effort * sig.flow_rate - sig.flow * sig.effort_rate


def _check_dim(x, model: QuadraticEnergyModel, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise ValueError(f"{what} has shape {x.shape}, expected ({model.dim},)")
    return x


def stored_energy(x, model: QuadraticEnergyModel) -> float:
    """E = 1/2 x^T H x [J]; nonnegative for SPD H."""
    x = _check_dim(x, model, "state")
    return 0.5 * float(x @ model.inertia @ x)


def tangent_energy(xdot, model: QuadraticEnergyModel) -> float:
    """Et = 1/2 xd^T H xd; the stored-energy form evaluated on the velocity."""
    xdot = _check_dim(xdot, model, "state derivative")
    return 0.5 * float(xdot @ model.inertia @ xdot)


def dissipation(x, model: QuadraticEnergyModel) -> float:
    """D = x^T B x [W]."""
    x = _check_dim(x, model, "state")
    return float(x @ model.dissipation @ x)


def time_constant(x, model: QuadraticEnergyModel) -> float:
    """tau = E/D [s].  Raises DegenerateDissipation when D <= EPS_DIV.

    Callers that only need the E/tau term should use dissipation() directly;
    it is the same quantity and has no singularity.
    """
    d = dissipation(x, model)
    if d <= EPS_DIV:
        raise DegenerateDissipation(
            f"dissipation {d:.3e} W is below the division guard; "
            "time constant undefined")
    return stored_energy(x, model) / d


def outgoing_interaction_rate(energy_rate: float,
                              energy_rate_rate: float,
                              decay_power: float,
                              tangent: float,
                              control_power: float,
                              disturbance_power: float,
                              control_reactive_rate: float,
                              disturbance_reactive_rate: float) -> InteractionRate:
    """Outgoing interaction rate from the component's own energy balance.

    decay_power is the E/tau term, supplied as D(x) to avoid the tau
    singularity.  Returns

        power         =  p + decay - P_u - P_m
        reactive_rate = -pd + 4 Et - Qd_u - Qd_m

    Constant interaction variable (zero rate) in stand-alone steady state:
    p = pd = Et = 0 and P_u + P_m = decay.
    """
    p_out = energy_rate + decay_power - control_power - disturbance_power
    q_out = (-energy_rate_rate + 4.0 * tangent
             - control_reactive_rate - disturbance_reactive_rate)
    return InteractionRate(p_out, q_out)


def integrate_interaction(rates, dt: float):
    """Cumulative trapezoidal integral of a uniformly sampled rate series.

    rates: sequence of InteractionRate (or (P, Qd) pairs), sample spacing dt.
    Returns a list of InteractionVariable with accumulated(0) = (0, 0).
    Empty input gives an empty list.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    vals = [r.as_tuple() if isinstance(r, InteractionRate) else tuple(r) for r in rates]
    if not vals:
        return []
    arr = np.asarray(vals, dtype=float)
    out = np.zeros_like(arr)
    out[1:] = np.cumsum(0.5 * dt * (arr[1:] + arr[:-1]), axis=0)
    return [InteractionVariable((row[0], row[1])) for row in out]
