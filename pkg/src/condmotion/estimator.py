"""End-to-end analysis behind an sklearn-style estimator.

``ConditionalMotionRD().fit(frames)`` classifies blocks, runs diamond
search on active blocks, pools residuals over every consecutive frame
pair and stores the model parameters in ``params_``. ``predict`` then
evaluates the theoretical rate at given distortions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .activity import ActivityMap, BlockGrid, Thresholds, classify, difference_image
from .coder import EmpiricalPoint, QuantizerSpec, measure, pool_points
from .frames import VideoSequence
from .motion import MotionField, ResidualSet, estimate_motion, extract_residuals
from .rdmodel import rate_combined
from .stats import ModelParams, estimate_params, fit_gauss_markov, temporal_lag1


def check_sequence(X, min_frames: int = 2) -> np.ndarray:
    """Validate a video as a finite (n, height, width) float array."""
    frames = X.frames if isinstance(X, VideoSequence) else np.asarray(X, dtype=np.float64)
    if frames.ndim != 3:
        raise ValueError(f"expected frames shaped (n, height, width), got {frames.shape}")
    if frames.shape[0] < min_frames:
        raise ValueError(f"need at least {min_frames} frames, got {frames.shape[0]}")
    if not np.all(np.isfinite(frames)):
        raise ValueError("frames contain NaN or infinite samples")
    return frames.astype(np.float64, copy=False)


@dataclass
class PairAnalysis:
    anchor: np.ndarray
    target: np.ndarray
    amap: ActivityMap
    field: MotionField
    residuals: ResidualSet
    params: ModelParams


@dataclass
class Analysis:
    params: ModelParams
    pairs: list
    residuals: ResidualSet
    rho_temporal: float = 0.0


def analyze_pair(anchor, target, grid: BlockGrid, th: Thresholds, search_range: int = 15, b_m=None) -> PairAnalysis:
    amap = classify(difference_image(anchor, target), grid, th)
    mf = estimate_motion(anchor, target, amap, search_range, b_m)
    res = extract_residuals(anchor, target, amap, mf)
    return PairAnalysis(anchor, target, amap, mf, res, estimate_params(res, amap, mf))


def analyze(frames, block: int = 16, t_g: float = 15.0, t_p=None, search_range: int = 15, b_m=None) -> Analysis:
    """Analyze every consecutive frame pair and pool the statistics by sample count."""
    frames = check_sequence(frames)
    grid = BlockGrid.for_frame(frames.shape[2], frames.shape[1], block)
    th = Thresholds(t_g, t_p)
    pairs = [analyze_pair(frames[k], frames[k + 1], grid, th, search_range, b_m) for k in range(len(frames) - 1)]
    pooled = ResidualSet.pool(p.residuals for p in pairs)
    # all pairs share the grid, so block-weighted pooling of lambda is a plain mean
    lam = float(np.mean([p.amap.lambda_m for p in pairs]))
    params = estimate_params(pooled, pairs[0].amap, pairs[0].field)
    params.lambda_m = lam

    rho_t = []
    for a, b in zip(pairs, pairs[1:]):
        both = ~a.amap.pixel_mask & ~b.amap.pixel_mask
        fd_a = grid.crop(a.target) - grid.crop(a.anchor)
        fd_b = grid.crop(b.target) - grid.crop(b.anchor)
        rho_t.append(temporal_lag1(fd_a, fd_b, both))
    return Analysis(params, pairs, pooled, float(np.mean(rho_t)) if rho_t else 0.0)


class ConditionalMotionRD(BaseEstimator):
    """Conditional motion estimation with a closed-form R-D model.

    Parameters
    ----------
    block : int
        Square block size in pixels.
    t_g : float
        Pixel threshold on the absolute frame difference.
    t_p : int or None
        Block threshold on the active-pixel count; ``None`` uses area // 8.
    search_range : int
        Maximum motion vector component.
    b_m : float or None
        Bits per motion vector; ``None`` uses a fixed-length code for the range.
    include_mv : bool
        Whether ``predict`` adds the motion-vector rate.
    """

    def __init__(self, block=16, t_g=15.0, t_p=None, search_range=15, b_m=None, include_mv=False):
        self.block = block
        self.t_g = t_g
        self.t_p = t_p
        self.search_range = search_range
        self.b_m = b_m
        self.include_mv = include_mv

    def fit(self, X, y=None):
        result = analyze(X, self.block, self.t_g, self.t_p, self.search_range, self.b_m)
        self.analysis_ = result
        self.params_ = result.params
        self.pair_params_ = [p.params for p in result.pairs]
        self.lambda_m_ = result.params.lambda_m
        self.rho_i_ = result.params.rho_i
        self.rho_temporal_ = result.rho_temporal
        self.n_frames_in_ = len(result.pairs) + 1
        return self

    def transform(self, X):
        """Per-pair parameter rows: lambda_m, sigma2_a, sigma2_i, rho_i."""
        check_is_fitted(self, "params_")
        result = analyze(X, self.block, self.t_g, self.t_p, self.search_range, self.b_m)
        return np.array([[p.params.lambda_m, p.params.sigma2_a, p.params.sigma2_i, p.params.rho_i] for p in result.pairs])

    def predict(self, distortions):
        """Theoretical rate (bits/pixel) at each distortion, equal in both streams."""
        check_is_fitted(self, "params_")
        d = np.asarray(distortions, dtype=np.float64)
        return np.array([rate_combined(self.params_, float(v), float(v), self.include_mv) for v in d.ravel()]).reshape(
            d.shape
        )

    def fit_report(self, bins: int = 64):
        check_is_fitted(self, "params_")
        return fit_gauss_markov(self.analysis_.residuals, bins)

    def measure(self, steps) -> list[EmpiricalPoint]:
        """Empirical points on the fitted sequence, pooled over frame pairs per step."""
        check_is_fitted(self, "params_")
        pairs = self.analysis_.pairs
        return [
            pool_points(measure(p.anchor, p.target, p.amap, p.field, QuantizerSpec(float(s))) for p in pairs)
            for s in steps
        ]
