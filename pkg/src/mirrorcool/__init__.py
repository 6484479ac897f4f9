"""mirrorcool: steady states of feedback-cooled optomechanical mirrors.

Closed-form stationary moments, a spectral quadrature oracle, and linear-SDE
simulation for the momentum-feedback and cold-damping schemes, plus the
ring-cavity relative-motion entanglement analysis.
"""

from .params import (BathParams, CavityParams, FeedbackKind, FeedbackScheme,
                     MechanicalParams, ParameterDomainError, RelativeFrame,
                     SemiclassicalSolution, SolverError, SystemParams,
                     cold_damping, derive_zeta, momentum_feedback,
                     ring_relative, solve_semiclassical, to_relative_frame,
                     zeta_from_power)
from .steady import (Breakdown, NonclassicalityReport, OptimumResult,
                     SqueezingOptimum, SteadyState, cold_damping_energy_units,
                     cold_damping_optimum, cold_damping_state,
                     contractive_threshold, entanglement_marker,
                     log_correction_term, momentum_feedback_energy_units,
                     momentum_feedback_optimum, momentum_feedback_state,
                     nonclassicality, squeezing_minimum, steady_state,
                     total_momentum_variance)
from .spectral import (BandFilterResult, LogProbeResult, SpectralResult,
                       Susceptibility, detection_band_filter_effect,
                       log_correction_probe, spectral_state, susceptibility,
                       variance_integral)
from .langevin import (EnsembleStats, LinearSDE, StabilityError,
                       acf_envelope_rate, adiabatic_validity_check, build_sde,
                       simulate_ensemble, stationary_covariance_lyapunov)
from .sweep import (ConfigError, RunConfig, SweepRow, build_config,
                    load_config, parse_config_text, read_rows, run_sweep,
                    write_rows)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
