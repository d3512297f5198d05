"""railtdl: measurement-based non-stationary Markov TDL channel toolkit.

Synthesizes time-varying tapped-delay-line channel impulse responses with
Markov birth-death multipath gating, recovers model parameters from traces,
and computes the delay-spread statistics used to compare against a
stationary WSSUS baseline.
"""

from .baseline import StationaryTdlProfile, generate_stationary, profile_from_params
from .estimator import (EstimatedModel, EstimationDiagnostics, assign_states,
                        estimate_model)
from .generator import (CirTrace, GenConfig, TraceMeta, apply_to_signal,
                        correlated_lognormal_draw, generate,
                        nearest_psd_correlation)
from .kernels import BACKEND
from .markov import (ChainEstimate, MarkovChain2, StatePath, estimate_chain,
                     sample_path, stationary)
from .params import (LognormalParams, ParamValidationError, TapEntry,
                     TapParameterSet, load_params, max_doppler, preset_5gr,
                     save_params, tap_count, validate)
from .stats import (Apdp, DistanceReport, EmpiricalPdf, LognormalFit, apdp,
                    correlation_matrix, distribution_distance, empirical_pdf,
                    fit_lognormal, rms_delay_spread, rms_ds_series)
from .traceio import TraceFormatError, read_trace, write_trace
from .version import __version__

__all__ = [
    "__version__",
    "BACKEND",
    # params
    "LognormalParams", "TapEntry", "TapParameterSet", "ParamValidationError",
    "preset_5gr", "validate", "tap_count", "max_doppler", "save_params",
    "load_params",
    # markov
    "MarkovChain2", "StatePath", "ChainEstimate", "stationary", "sample_path",
    "estimate_chain",
    # generator
    "CirTrace", "GenConfig", "TraceMeta", "generate", "apply_to_signal",
    "correlated_lognormal_draw", "nearest_psd_correlation",
    # stats
    "Apdp", "EmpiricalPdf", "LognormalFit", "DistanceReport", "apdp",
    "rms_delay_spread", "rms_ds_series", "fit_lognormal", "correlation_matrix",
    "empirical_pdf", "distribution_distance",
    # estimator
    "EstimatedModel", "EstimationDiagnostics", "estimate_model", "assign_states",
    # baseline
    "StationaryTdlProfile", "generate_stationary", "profile_from_params",
    # trace io
    "read_trace", "write_trace", "TraceFormatError",
]
