"""Exception types shared across the package.

Division guards use EPS_DIV: any divisor whose magnitude falls at or below
this threshold raises the matching degenerate-input error instead of
returning an infinity.  The simulation loop converts these into an aborted
run with diagnostics; for deliberately unstable scenarios the abort IS the
result.
"""

EPS_DIV = 1e-12


class EnspaceError(Exception):
    """Base class for all package errors."""


class DegenerateDissipation(EnspaceError):
    """Dissipation is (numerically) zero; the time constant is undefined."""


class DegenerateState(EnspaceError):
    """A state-dependent division guard failed (e.g. terminal voltage ~ 0)."""


class DegenerateControlPort(EnspaceError):
    """Control-port current too small to invert the control lift."""


class OutOfHorizon(EnspaceError):
    """A load profile was evaluated outside its declared time span."""


class NoReaching(EnspaceError):
    """The sliding variable never crossed zero within the trajectory."""


class NeverSettles(EnspaceError):
    """The signal never enters the settling band within the horizon."""


class ConfigError(EnspaceError):
    """Scenario configuration file is malformed or inconsistent."""


class SimulationAborted(EnspaceError):
    """A guard tripped mid-run.  Carries the failing time and diagnostics."""

    def __init__(self, t, cause, state=None):
        self.t = t
        self.cause = cause
        self.state = state
        super().__init__(f"simulation aborted at t={t:.6g} s: {cause}"
                         + (f" (state {state})" if state is not None else ""))
