"""Feed-forward interconnection feasibility: interval ranges and containment.

Per time window, the load side declares ranges of its power and power rate;
from those the source's admissible incoming interaction-rate box follows:

    P_in  in [-P_max, -P_min]
    Qd_in in [-Pdot_max, -Pdot_min] + (2/tau') * <power interval>

tau' is the closed-loop voltage time constant, min(10 L/R, 1/K); the 2/tau'
term models the reactive-rate excursion 2 (P/v) dv/dt of a voltage moving no
faster than |dv/dt| <= v/tau'.

Two shapes of the Qd interval are provided:

* as-printed: (2/tau')[P_min, P_max] - a one-sided band (the literal
  published formula, retained verbatim);
* symmetric:  (2/tau')[-P_max, +P_max] - contains every rate realizable
  under the |dv/dt| <= v/tau' excursion model, including the steady state.

The shipped presets and the violation scan use the symmetric shape; the
as-printed shape cannot contain the steady-state rate (which is 0) whenever
P_min > 0, so a sound feed-forward check is impossible with it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .components import RlcParams, LoadProfile


@dataclass(frozen=True)
class IntervalBox:
    """Axis-aligned box of interaction rates: power x reactive rate."""

    P_lo: float
    P_hi: float
    Qd_lo: float
    Qd_hi: float

    def __post_init__(self):
        if self.P_lo > self.P_hi or self.Qd_lo > self.Qd_hi:
            raise ValueError("interval bounds must satisfy lo <= hi")

    def contains_box(self, other: "IntervalBox") -> bool:
        return (self.P_lo <= other.P_lo and other.P_hi <= self.P_hi
                and self.Qd_lo <= other.Qd_lo and other.Qd_hi <= self.Qd_hi)

    def contains_point(self, power: float, reactive_rate: float) -> bool:
        return (self.P_lo <= power <= self.P_hi
                and self.Qd_lo <= reactive_rate <= self.Qd_hi)


@dataclass(frozen=True)
class RangeSchedule:
    """Contiguous windows of length window_s with one box per window."""

    window_s: float
    boxes: tuple

    def __post_init__(self):
        if self.window_s <= 0:
            raise ValueError("window length must be positive")
        object.__setattr__(self, "boxes", tuple(self.boxes))

    @property
    def horizon(self) -> float:
        return self.window_s * len(self.boxes)

    def box_at(self, t: float) -> IntervalBox:
        k = min(int(t / self.window_s), len(self.boxes) - 1)
        return self.boxes[k]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "t_start", "P_lo", "P_hi", "Qd_lo", "Qd_hi"])
            for k, b in enumerate(self.boxes):
                w.writerow([k, repr(k * self.window_s),
                            repr(b.P_lo), repr(b.P_hi), repr(b.Qd_lo), repr(b.Qd_hi)])

    @classmethod
    def from_csv(cls, path) -> "RangeSchedule":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: empty range schedule")
        boxes = [IntervalBox(float(r["P_lo"]), float(r["P_hi"]),
                             float(r["Qd_lo"]), float(r["Qd_hi"])) for r in rows]
        if len(rows) > 1:
            window = float(rows[1]["t_start"]) - float(rows[0]["t_start"])
        else:
            window = float(rows[0]["t_start"]) or 1.0
        return cls(window, boxes)


def incoming_range_from_load(P_min: float, P_max: float,
                             Pdot_min: float, Pdot_max: float,
                             tau_prime_s: float,
                             symmetric: bool = False) -> IntervalBox:
    """Incoming interaction-rate box from declared load ranges.

    symmetric=False reproduces the published one-sided Qd band
    (2/tau')[P_min, P_max]; symmetric=True widens it to
    (2/tau')[-P_max, P_max], the sound version used by the shipped checks.
    """
    if P_min > P_max or Pdot_min > Pdot_max:
        raise ValueError("range bounds must satisfy min <= max")
    if tau_prime_s <= 0:
        raise ValueError("tau' must be positive")
    swing = 2.0 / tau_prime_s
    if symmetric:
        q_lo, q_hi = -swing * abs(P_max), swing * abs(P_max)
    else:
        q_lo, q_hi = swing * P_min, swing * P_max
    return IntervalBox(-P_max, -P_min, -Pdot_max + q_lo, -Pdot_min + q_hi)


def tau_prime(params: RlcParams, controller_gain: float) -> float:
    """Closed-loop voltage time constant: min(10 L/R, 1/K).

    K is the effective voltage-loop gain: the proportional law's voltage
    gain for output feedback, the energy-space tracking gain for the energy
    controllers.
    """
    if controller_gain <= 0:
        raise ValueError("controller gain must be positive")
    return min(10.0 * params.L / params.R, 1.0 / controller_gain)


@dataclass(frozen=True)
class ContainmentVerdict:
    feasible: bool
    axis: str | None = None        # 'P' or 'Qd' when infeasible
    margin: float = 0.0            # how far outside, in the axis unit

    def __bool__(self):
        return self.feasible


def check_containment(outgoing: IntervalBox, incoming: IntervalBox) -> ContainmentVerdict:
    """FEASIBLE iff the outgoing box sits inside the incoming box (non-strict).

    On failure reports the worst axis and the overhang distance.
    """
    p_over = max(incoming.P_lo - outgoing.P_lo, outgoing.P_hi - incoming.P_hi)
    q_over = max(incoming.Qd_lo - outgoing.Qd_lo, outgoing.Qd_hi - incoming.Qd_hi)
    if p_over <= 0.0 and q_over <= 0.0:
        return ContainmentVerdict(True)
    if p_over >= q_over:
        return ContainmentVerdict(False, "P", p_over)
    return ContainmentVerdict(False, "Qd", q_over)


def schedule_from_profile(load: LoadProfile, window_s: float, horizon: float,
                          tau_prime_s: float, symmetric: bool = True) -> RangeSchedule:
    """Declare per-window incoming boxes from exact profile min/max ranges."""
    n = max(1, int(round(horizon / window_s)))
    boxes = []
    for k in range(n):
        Pmin, Pmax, Smin, Smax = load.window_ranges(k * window_s, (k + 1) * window_s)
        boxes.append(incoming_range_from_load(Pmin, Pmax, Smin, Smax,
                                              tau_prime_s, symmetric=symmetric))
    return RangeSchedule(window_s, boxes)


@dataclass(frozen=True)
class Violation:
    time: float
    window: int
    axis: str
    value: float
    bound_lo: float
    bound_hi: float


def detect_violation(traj, schedule: RangeSchedule, which: str = "both"):
    """Earliest recorded sample whose source outgoing rate leaves its window box.

    Scans the port-measured outgoing series (power row and/or reactive row
    per `which` in {'P', 'Qd', 'both'}).  Returns a Violation or None.  An
    empty schedule or trajectory yields None.
    """
    if which not in ("P", "Qd", "both"):
        raise ValueError("which must be 'P', 'Qd' or 'both'")
    if len(schedule.boxes) == 0 or len(traj) == 0:
        return None
    t = traj.t
    P = traj.P_out_src
    Q = traj.Qd_out_src
    horizon = schedule.horizon
    for j in range(len(traj)):
        if t[j] >= horizon:
            break
        k = int(t[j] / schedule.window_s)
        box = schedule.boxes[k]
        if which in ("P", "both") and not (box.P_lo <= P[j] <= box.P_hi):
            return Violation(float(t[j]), k, "P", float(P[j]), box.P_lo, box.P_hi)
        if which in ("Qd", "both") and not (box.Qd_lo <= Q[j] <= box.Qd_hi):
            return Violation(float(t[j]), k, "Qd", float(Q[j]), box.Qd_lo, box.Qd_hi)
    return None
