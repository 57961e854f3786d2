"""Simulation laboratory for fixed-time integral sliding mode control with
admittance trajectory shaping on a two-link planar manipulator."""

from .admittance import (AdmittanceParams, AdmittanceState, ForceProfile,
                         Reference, admittance_accel, desired_trajectory,
                         human_force, reference)
from .analysis import (BoundReport, bound_report_text, empirical_settling_time,
                       lyapunov_traces, rmse, theoretical_bounds)
from .config import ConfigError, SimConfig, default_config, load_config
from .controllers import (BENCHMARK_CONTROLLERS, BspGains, CompensatorGains,
                          ControlOutput, CtcGains, FtSurfaceGains, GainSet,
                          NsSurfaceGains, PidGains, compensator, control_output)
from .dynamics import (CartesianModel, JointState, RobotParams,
                       SingularityError, cartesian_model, forward_dynamics,
                       forward_kinematics, inverse_kinematics, jacobian,
                       lumped_uncertainty)
from .fxmath import (FixedTimeGains, fixed_time_bound, saturated_sign,
                     scalar_settling_time, signed_power)
from .simulation import (LOG_COLUMNS, SimResult, SimState, derivative,
                         initial_state, rk4_step, run_scenario)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
