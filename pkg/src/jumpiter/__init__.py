"""Discretisation error of third-order iterated integrals driven by jump processes."""
__version__ = "0.1.0"

from .dolean_milstein import ExponentialPath, SchemeCurve, doleans_exact, milstein_scheme
from .errors import ConfigError, UsageError
from .iterated_error import (ErrorCurve, JumpTermRecord, bm_cell_closed_form, decompose_error,
                             divergent_term, iterated_error_process, jump_terms, s_curve)
from .levy_path import (IntegratedPath, LevyTriplet, PathSkeleton, SigmaModel, build_skeleton,
                        integrate_sigma, refine_skeleton, simulate_jumps)
from .limit_law import LimitForm, draw_ingredients, sample_limit_U, sample_limit_X
from .randomness import DistSpec, StreamKey, derive_stream, parse_dist, sample, stream
from .stats import RateFit, SampleSummary, ks_two_sample, loglog_rate, summarize
