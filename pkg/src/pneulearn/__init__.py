"""Learning control of a simulated proportional-valve pneumatic cylinder:
wavelet-filtered trial-to-trial feedforward updates with a GA-tunable fuzzy
PD feedback loop."""

from .signals import Signal, one_norm, rms, two_norm
from .wavelets import (WaveletConfig, DecompositionTree, decompose,
                       reconstruct, wfilter, band_signals, contraction_check,
                       SUPPORTED_WAVELETS)
from .plant import (PlantParams, PlantState, FrictionParams, flow_constant,
                    valve_mass_flow, friction_force, derivatives, step,
                    initial_state, PneumaticSimulator, adiabatic_invariants)
from .fuzzy import (SfDcGenes, MembershipSet, FuzzyPdConfig, build_memberships,
                    fuzzy_pd, delta_error, RULE_TABLE, LABELS)
from .pid import (PidGains, PidState, UltimatePoint, zn_tune, pid_control,
                  find_ultimate_gain, ZnSearchConfig, UltimateGainNotFound)
from .linear import (LinearPlantParams, LinearSimulator, frequency_response,
                     predicted_error_ratio, real_part_crossover,
                     integrator_chain, integrator_chain_ultimate)
from .ilc import (TrialSetup, IterationRecord, LearningCurve, DisturbanceSpec,
                  run_trial, run_learning, update_feedforward,
                  convergence_ratio, DivergenceError)
from .ga import (Chromosome, GaConfig, GaHistory, fitness, evolve,
                 clip_to_bounds)
from .config import (ExperimentConfig, TrajectorySpec, ConfigError,
                     load_config, parse_config, generate_trajectory,
                     build_setup, DEFAULT_CONFIG)

__version__ = "0.1.0"
