"""Energy-space modeling and distributed energy control of a DC source/load pair.

Layout:
    energy        energy-space quantities, interaction-variable algebra
    components    RLC source model, load profiles, disturbance signals
    controllers   energy-space tracking laws and benchmark laws
    simulator     fixed-step closed-loop integration and trajectory recording
    feasibility   feed-forward interval ranges and containment checks
    verification  certificate audits and control metrics
    config/cli    scenario files, presets, batch front-end
"""

from .energy import (PortSignal, QuadraticEnergyModel, EnergyState,
                     InteractionRate, InteractionVariable,
                     instantaneous_power, reactive_power_rate, stored_energy,
                     tangent_energy, dissipation, time_constant,
                     outgoing_interaction_rate, integrate_interaction)
from .components import (RlcParams, RlcState, LoadProfile, DisturbanceProfile,
                         rlc_state_derivative, rlc_energy_output, rlc_eta,
                         rlc_eta_normal_form, cpl_incoming_rate)
from .controllers import (FblcConfig, SmcConfig, ConstantGainConfig,
                          BraytonMoserConfig, ReferenceCommand, RateEstimator,
                          reference_map, regulation_reference,
                          fblc_energy_control, smc_energy_control, control_lift,
                          constant_gain_control, brayton_moser_control)
from .simulator import (Scenario, Trajectory, RunResult, EnergyMatrices, run,
                        energy_trajectory_residual)
from .feasibility import (IntervalBox, RangeSchedule, incoming_range_from_load,
                          tau_prime, check_containment, schedule_from_profile,
                          detect_violation)
from .verification import (AuditReport, CheckResult, Metrics,
                           audit_fblc_stability, audit_dissipativity,
                           audit_smc_reaching, audit_network_lyapunov,
                           audit_tellegen, metrics, run_audits)

__version__ = "0.1.0"
