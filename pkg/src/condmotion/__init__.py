"""Conditional motion estimation and closed-form rate-distortion analysis for raw video."""
from .activity import ActivityMap, BlockGrid, Thresholds, classify, difference_image
from .coder import EmpiricalPoint, QuantizerSpec, bound_violations, entropy_rate, measure, quantize
from .estimator import ConditionalMotionRD, analyze
from .frames import SyntheticSpec, VideoSequence, read_raw_yuv420, synthesize, write_raw_yuv420
from .motion import MotionField, MotionVector, ResidualSet, diamond_search, extract_residuals, motion_compensate
from .rdmodel import generate_curve, rate_active, rate_combined, rate_inactive, rate_motion
from .stats import FitReport, ModelParams, estimate_params, fit_gauss_markov

__version__ = "0.1.0"
