"""Physical component models: controllable RLC source, power loads.

The source is a controllable voltage source u behind a series R-L branch
feeding a shunt capacitor C; the load hangs off the capacitor node and draws
a prescribed power P_l(t).  State x = [i, v] (inductor current, capacitor
voltage), inertia H = diag(L, C), dissipation B = diag(R, 0).

Conventions (all SI):
  * matched disturbance power P_mm enters at the inductor branch, default 0
  * the load appears as unmatched disturbance power P_mu = -P_l(t)
  * di/dt = (-R i - v + u)/L + P_mm/(L i)
  * dv/dt = (i + P_mu/v)/C          (= (i - P_l/v)/C for a load)

The v-row sign is fixed so that a positive load drawn from the capacitor
node discharges it; power balance then reads
d/dt(1/2 L i^2 + 1/2 C v^2) = u i - R i^2 + P_mm + P_mu.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EPS_DIV, DegenerateState, OutOfHorizon
from .energy import QuadraticEnergyModel, InteractionRate

#: Case-study parameters: R = 10 mOhm, L = 1.12 mH, C = 6.8 mF.
DEFAULT_R = 0.01
DEFAULT_L = 1.12e-3
DEFAULT_C = 6.8e-3


@dataclass(frozen=True)
class RlcParams:
    """Series resistance [ohm], inductance [H], shunt capacitance [F]."""

    R: float = DEFAULT_R
    L: float = DEFAULT_L
    C: float = DEFAULT_C

    def __post_init__(self):
        if self.R <= 0 or self.L <= 0 or self.C <= 0:
            raise ValueError("R, L, C must all be strictly positive")

    def energy_model(self) -> QuadraticEnergyModel:
        return QuadraticEnergyModel(np.diag([self.L, self.C]),
                                    np.diag([self.R, 0.0]))


@dataclass(frozen=True)
class RlcState:
    """Inductor current i [A], capacitor voltage v [V], source voltage u [V].

    u is a dynamic state for the energy controllers (integrated through the
    control lift) and an algebraic output for the static benchmark laws.
    """

    i: float
    v: float
    u: float


def rlc_state_derivative(s: RlcState, p: RlcParams,
                         P_mm: float = 0.0, P_mu: float = 0.0):
    """(di/dt, dv/dt) of the source.  P_mu = -P_l when a load is attached.

    Raises DegenerateState when a nonzero disturbance needs a division by a
    near-zero i or v; the model itself is singular there.
    """
    di = (-p.R * s.i - s.v + s.u) / p.L
    if P_mm != 0.0:
        if abs(s.i) <= EPS_DIV:
            raise DegenerateState(
                f"matched disturbance with |i|={abs(s.i):.3e} A at the guard")
        di += P_mm / (p.L * s.i)
    dv = s.i / p.C
    if P_mu != 0.0:
        if abs(s.v) <= EPS_DIV:
            raise DegenerateState(
                f"unmatched disturbance with |v|={abs(s.v):.3e} V at the guard")
        dv += P_mu / (p.C * s.v)
    return di, dv


def rlc_energy_output(s: RlcState, p: RlcParams, P_mm: float = 0.0) -> float:
    """Energy-space output y_z = R i^2 - u i - P_mm [W].

    Equals dissipation minus the power injected at the control and matched
    disturbance ports; at any equilibrium with P_mm = 0 this is -P_l, the
    power exported to the load.
    """
    return p.R * s.i * s.i - s.u * s.i - P_mm


def rlc_eta(s: RlcState, di: float, dv: float, p: RlcParams,
            i_load: float, di_load: float) -> float:
    """Lumped nonlinearity of the source as the case study prints it.

    Sum of three blocks: 4*Et, twice the capacitor-branch reactive rate
    (branch current i - i_load), and the outgoing-rate block
    2 R i di - 2 u di + 4 Et.  Recorded as ground truth along simulations;
    see rlc_eta_normal_form for the grouping the tracking controllers
    cancel.
    """
    et4 = 2.0 * p.L * di * di + 2.0 * p.C * dv * dv
    qc = s.v * (di - di_load) - (s.i - i_load) * dv
    return et4 + 2.0 * qc + (2.0 * p.R * s.i * di - 2.0 * s.u * di + et4)


def rlc_eta_normal_form(s: RlcState, di: float, dv: float, p: RlcParams,
                        Pdot_mm: float = 0.0) -> float:
    """Nonlinearity in the output's normal form: dy_z/dt = -4 Et + eta + u_z.

    eta = 2 (R i - u) di + 4 Et - Pdot_mm.  Exact cancellation of this
    grouping leaves the closed loop de/dt = -K e - 4 Et, the first-order
    error dynamics the energy controllers are designed around.
    """
    et4 = 2.0 * p.L * di * di + 2.0 * p.C * dv * dv
    return 2.0 * (p.R * s.i - s.u) * di + et4 - Pdot_mm


def cpl_incoming_rate(P_l: float, Pdot_l: float, v: float, dv: float) -> InteractionRate:
    """Interaction rate flowing into the source from a power load.

    power = -P_l, reactive_rate = -Pdot_l + 2 (P_l / v) dv.  The reactive
    part is the phase-shift cost of holding constant power off a moving
    voltage.  Requires |v| above the division guard.
    """
    if abs(v) <= EPS_DIV:
        raise DegenerateState(f"load voltage |v|={abs(v):.3e} V at the guard")
    return InteractionRate(-P_l, -Pdot_l + 2.0 * (P_l / v) * dv)


class LoadProfile:
    """Power draw P_l(t) >= 0 as breakpoint data.

    kind: 'constant' | 'piecewise_linear' | 'piecewise_constant'.
    Piecewise-constant profiles hold each level up to the next breakpoint;
    their steps are events: the derivative is zero on both sides and the
    simulator splits integration steps at breakpoints.  Duplicate times in a
    piecewise_linear profile likewise denote a jump.
    """

    def __init__(self, kind: str, times, powers):
        if kind not in ("constant", "piecewise_linear", "piecewise_constant"):
            raise ValueError(f"unknown load profile kind {kind!r}")
        times = [float(t) for t in times]
        powers = [float(p) for p in powers]
        if len(times) != len(powers) or not times:
            raise ValueError("times and powers must be equal-length, nonempty")
        if any(t1 < t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("breakpoint times must be nondecreasing")
        if any(p <= 0.0 for p in powers):
            raise ValueError("load power must stay strictly positive")
        if kind == "constant" and len(set(powers)) != 1:
            raise ValueError("constant profile with varying power values")
        self.kind = kind
        self.times = times
        self.powers = powers

    @classmethod
    def constant(cls, power: float, horizon: float = math.inf) -> "LoadProfile":
        end = horizon if math.isfinite(horizon) else 1e12
        return cls("constant", [0.0, end], [power, power])

    @classmethod
    def from_csv(cls, path, kind: str = "piecewise_linear") -> "LoadProfile":
        """Read columns t_seconds, power_watts (header required, monotone t)."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or \
                    [c.strip() for c in reader.fieldnames[:2]] != ["t_seconds", "power_watts"]:
                raise ValueError(
                    f"{path}: expected header 't_seconds,power_watts', "
                    f"got {reader.fieldnames}")
            times, powers = [], []
            for row in reader:
                times.append(float(row["t_seconds"]))
                powers.append(float(row["power_watts"]))
        return cls(kind, times, powers)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_seconds", "power_watts"])
            for t, p in zip(self.times, self.powers):
                w.writerow([repr(t), repr(p)])

    @property
    def horizon(self) -> float:
        return self.times[-1]

    def breakpoints_between(self, t0: float, t1: float):
        """Breakpoint times strictly inside (t0, t1), for event splitting."""
        lo = bisect.bisect_right(self.times, t0)
        hi = bisect.bisect_left(self.times, t1)
        out = []
        for t in self.times[lo:hi]:
            if not out or t > out[-1]:
                out.append(t)
        return out

    def evaluate(self, t: float):
        """(P_l, dP_l/dt) at time t.  Raises OutOfHorizon outside the span.

        Piecewise-constant segments and jumps report zero derivative; within
        a linear segment the derivative is the segment slope.
        """
        ts, ps = self.times, self.powers
        if t < ts[0] or t > ts[-1]:
            raise OutOfHorizon(f"t={t:.6g} s outside load horizon "
                               f"[{ts[0]:.6g}, {ts[-1]:.6g}]")
        j = bisect.bisect_right(ts, t) - 1
        if j >= len(ts) - 1:
            return ps[-1], 0.0
        # skip zero-width (jump) segments: take the segment starting at t
        while j < len(ts) - 1 and ts[j + 1] == ts[j] and ts[j] <= t:
            j += 1
        if j >= len(ts) - 1:
            return ps[-1], 0.0
        if self.kind == "piecewise_constant":
            return ps[j], 0.0
        dt = ts[j + 1] - ts[j]
        if dt <= 0.0:
            return ps[j], 0.0
        slope = (ps[j + 1] - ps[j]) / dt
        if self.kind == "constant":
            slope = 0.0
        return ps[j] + slope * (t - ts[j]), slope

    def window_ranges(self, t0: float, t1: float):
        """Exact (P_min, P_max, Pdot_min, Pdot_max) over [t0, t1].

        Scans every profile segment overlapping the window; extremes of a
        linear segment sit at its clipped endpoints.  Jump/constant segments
        contribute zero slope.
        """
        Pmin, Pmax = math.inf, -math.inf
        Smin, Smax = math.inf, -math.inf
        ts, ps = self.times, self.powers
        for j in range(len(ts) - 1):
            a, b = ts[j], ts[j + 1]
            if b <= t0 or a >= t1:
                continue
            ca, cb = max(a, t0), min(b, t1)
            if b > a and self.kind == "piecewise_linear":
                slope = (ps[j + 1] - ps[j]) / (b - a)
            else:
                slope = 0.0
            if self.kind == "piecewise_constant":
                vals = (ps[j],)
            else:
                vals = (ps[j] + slope * (ca - a), ps[j] + slope * (cb - a))
            Pmin, Pmax = min(Pmin, *vals), max(Pmax, *vals)
            Smin, Smax = min(Smin, slope), max(Smax, slope)
        if not math.isfinite(Pmin):
            raise OutOfHorizon(f"window [{t0}, {t1}] not covered by profile")
        return Pmin, Pmax, Smin, Smax


@dataclass(frozen=True)
class DisturbanceProfile:
    """Matched disturbance P_mm(t); constant, default 0 (unmatched focus)."""

    power: float = 0.0

    def evaluate(self, t: float):
        return self.power, 0.0
