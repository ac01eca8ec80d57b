"""Multi-UAV data-collection scheduling simulator.

Minimizes the expected Age-of-Updates at a base station by jointly
optimizing probabilistic device/UAV/BS associations and UAV 3D positions per
communication round, then sampling realized associations.
"""

from .scenario import (Box, ConfigError, DeviceSpec, GeometryError, Position3,
                       RotorParams, ScenarioConfig, UavSpec, load_config,
                       make_default_scenario, scatter_devices, validate,
                       validate_geometry, write_config)
from .channel import FadingSample, LinkGain, distance, link_gain, rate, sample_fading, snr
from .energy import EnergyError, RoundEnergy, hover_power, propulsion_power, round_energy
from .aou import (AoUState, AssociationOutcome, bs_pending_age, device_aou,
                  expected_aou, global_aou, step_device_age)
from .association import (EmptyMultisetError, RandomStream, deterministic_policy,
                          i2u_sample, multiset_counts, sample_outcome, u2b_sample)
from .program import (ConvexProgram, DecisionVector, Packing, ProgramError,
                      RoundContext, assemble_round_program, collision_constraints,
                      device_rate_constraint, energy_constraint,
                      make_round_context, product_link_constraints,
                      travel_constraint, uav_rate_constraint)
from .solver import (InfeasibleError, LineSearchError, PhaseOneResult,
                     SolveOptions, SolveResult, SolverError, check_gradients,
                     phase_one, sample_strictly_feasible, solve,
                     strictly_feasible)
from .driver import (RoundTrace, RunSummary, read_trace_csv, run_baseline,
                     run_jas, run_replications, run_round_loop, summarize,
                     trace_columns, write_trace_csv, write_traces)

__version__ = "0.1.0"
