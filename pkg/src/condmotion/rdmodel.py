"""Closed-form rate expressions and theoretical R-D curves.

Rates are in bits per pixel, distortions are per-pixel MSE. Each stream's
rate is clamped at zero once the distortion reaches its (effective)
variance, following the usual Gaussian R(D) convention.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .stats import ModelParams

SOURCES = ("theory-active", "theory-inactive", "theory-combined", "empirical")
MODES = {"combined": "theory-combined", "all-active": "theory-active", "all-inactive": "theory-inactive"}
CURVE_COLUMNS = ["distortion", "rate", "source", "lambda_m", "rho_i", "sigma2_a", "sigma2_i"]


class DomainError(ValueError):
    pass


def _check_distortion(d):
    if not d > 0:
        raise DomainError(f"distortion must be positive, got {d}")


def _half_log2_ratio(variance, d):
    if variance <= d:
        return 0.0
    return 0.5 * math.log2(variance / d)


def rate_active(sigma2_a: float, d_a: float) -> float:
    """i.i.d. Gaussian rate of the displaced-frame-difference stream."""
    _check_distortion(d_a)
    return _half_log2_ratio(sigma2_a, d_a)


def rate_inactive(sigma2_i: float, rho_i: float, d_i: float) -> float:
    """First-order Gauss-Markov rate of the frame-difference stream."""
    _check_distortion(d_i)
    if not abs(rho_i) < 1:
        raise DomainError(f"|rho_i| must be < 1, got {rho_i}")
    return _half_log2_ratio((1.0 - rho_i * rho_i) * sigma2_i, d_i)


def rate_motion(b_m: float, block_w: int, block_h: int) -> float:
    area = block_w * block_h
    if area <= 0:
        raise DomainError("block area must be positive")
    return b_m / area


def closed_form_rate(params: ModelParams, d_a: float, d_i: float) -> float:
    """log2 of the product of the two streams' weighted variance-to-distortion ratios."""
    _check_distortion(d_a)
    _check_distortion(d_i)
    if not abs(params.rho_i) < 1:
        raise DomainError(f"|rho_i| must be < 1, got {params.rho_i}")
    lam = params.lambda_m
    ratio_a = max(1.0, params.sigma2_a / d_a)
    ratio_i = max(1.0, (1.0 - params.rho_i**2) * params.sigma2_i / d_i)
    return math.log2(ratio_a ** (lam / 2) * ratio_i ** ((1 - lam) / 2))


def weighted_rate(params: ModelParams, d_a: float, d_i: float) -> float:
    """lambda*(R_A + R_M) + (1 - lambda)*R_I."""
    lam = params.lambda_m
    r_a = rate_active(params.sigma2_a, d_a)
    r_i = rate_inactive(params.sigma2_i, params.rho_i, d_i)
    r_m = rate_motion(params.b_m, params.block_w, params.block_h)
    return lam * (r_a + r_m) + (1 - lam) * r_i


def rate_combined(params: ModelParams, d_a: float, d_i: float | None = None, include_mv: bool = False) -> float:
    """Overall rate; the closed form without motion-vector cost unless ``include_mv``.

    The two forms coincide when ``b_m == 0``.
    """
    d_i = d_a if d_i is None else d_i
    if include_mv:
        return weighted_rate(params, d_a, d_i)
    return closed_form_rate(params, d_a, d_i)


@dataclass
class RDPoint:
    distortion: float
    rate: float
    source: str
    extra: dict = field(default_factory=dict)


@dataclass
class RDCurve:
    points: list
    params: ModelParams
    lambda_m: float | None = None  # effective weight used; differs from params for boundary modes

    @property
    def distortions(self) -> np.ndarray:
        return np.array([p.distortion for p in self.points])

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    @property
    def source(self) -> str:
        return self.points[0].source if self.points else ""

    def rows(self):
        lam = self.params.lambda_m if self.lambda_m is None else self.lambda_m
        for p in self.points:
            row = {
                "distortion": p.distortion,
                "rate": p.rate,
                "source": p.source,
                "lambda_m": lam,
                "rho_i": self.params.rho_i,
                "sigma2_a": self.params.sigma2_a,
                "sigma2_i": self.params.sigma2_i,
            }
            row.update(p.extra)
            yield row


def distortion_grid(d_min: float, d_max: float, n: int) -> np.ndarray:
    if not 0 < d_min < d_max:
        raise DomainError(f"need 0 < d_min < d_max, got {d_min}, {d_max}")
    if n < 2:
        raise DomainError("need at least 2 grid points")
    return np.geomspace(d_min, d_max, n)


def generate_curve(
    params: ModelParams,
    d_min: float,
    d_max: float,
    n: int,
    mode: str = "combined",
    include_mv: bool = False,
) -> RDCurve:
    """Log-spaced theoretical curve with equal distortion in both streams.

    ``all-active`` forces lambda_m = 1 (upper edge of the R-D region),
    ``all-inactive`` forces lambda_m = 0 (lower edge).
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {sorted(MODES)}")
    lam = {"combined": params.lambda_m, "all-active": 1.0, "all-inactive": 0.0}[mode]
    p = replace(params, lambda_m=lam)
    points = [
        RDPoint(float(d), rate_combined(p, float(d), float(d), include_mv), MODES[mode])
        for d in distortion_grid(d_min, d_max, n)
    ]
    return RDCurve(points, params, lam)


def region(params: ModelParams, d_min: float, d_max: float, n: int, include_mv: bool = False) -> list:
    """The combined curve bracketed by the all-active and all-inactive curves."""
    return [generate_curve(params, d_min, d_max, n, m, include_mv) for m in ("all-active", "combined", "all-inactive")]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def write_curves_csv(path, curves, columns=CURVE_COLUMNS) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for curve in curves:
            for row in curve.rows() if isinstance(curve, RDCurve) else curve:
                w.writerow([_fmt(row.get(c)) for c in columns])
