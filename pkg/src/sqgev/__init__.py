"""Pseudo-spectral simulator and diagnostics for the 2D supercritical
quasi-geostrophic equation in Gevrey-Sobolev spaces."""

from .analysis import (BlowupEnvelope, DecayReport, EnergyLedger, RunReport,
                       SmallDataCheck, bkm_integral, blowup_envelope_eval,
                       decay_report, energy_inequality_audit, no_blowup_before,
                       nonlinear_term_direct, pointwise_inequality_probe,
                       product_ratio_probe, small_data_check)
from .config import (ExperimentConfig, MonitorConfig, OutputConfig,
                     emit_config, parse_config, parse_sweep)
from .errors import (BandOutOfRange, Divergence, EmptyLedger,
                     InequalityViolated, NonEvenSymbol, NonPositiveRemaining,
                     ParseError, SqgevError, StabilityViolation,
                     ValidationError, WeightOverflow, ZeroInitialData)
from .initial_data import InitialDataSpec, generate_initial_data
from .norms import (GevreyParams, NormReport, bridge_constant, gevrey_norm,
                    norm_report, spectral_norm, xsigma_norm)
from .orchestrate import orchestrate, read_series, run_sweep, write_series
from .solver import (PicardResult, RunResult, RunState, SolverConfig,
                     bisect_contraction_horizon, calibrate_existence_constant,
                     existence_time_estimate, fit_decay_exponent, kato_compare,
                     linear_symbol, picard_iterate, run, step)
from .spectral import (GridSpec, SpectralField, VelocityField, apply_operator,
                       fractional_symbol, fractional_symbol_array, load_field,
                       nonlinear_term, riesz_velocity, save_field)

__version__ = "0.1.0"
