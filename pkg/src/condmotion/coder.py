"""Measurement coder: midtread scalar quantization plus zeroth-order entropy.

Stands in for a real codec when producing empirical (rate, distortion)
points. Rates are bits per luminance pixel; the file-size normalization
``encoded/original * 8`` used for 4:2:0 files counts chroma bytes too and
is therefore 1.5x smaller for the same bitstream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activity import ActivityMap
from .frames import as_frame
from .motion import MotionField, ResidualSet, extract_residuals, motion_compensate
from .rdmodel import rate_combined, rate_motion
from .stats import InsufficientDataError


@dataclass(frozen=True)
class QuantizerSpec:
    step: float
    kind: str = "uniform-midtread"

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"quantizer step must be positive, got {self.step}")
        if self.kind != "uniform-midtread":
            raise ValueError(f"unsupported quantizer kind {self.kind!r}")


@dataclass
class EmpiricalPoint:
    rate_total: float
    rate_mv: float
    rate_residual: float
    distortion: float
    step: float | None = None
    lambda_m: float | None = None


def quantize_samples(x, step: float):
    """Return (indices, reconstruction). Ties round half to even."""
    idx = np.rint(np.asarray(x, dtype=np.float64) / step).astype(np.int64)
    return idx, idx * step


def quantize(res: ResidualSet, q: QuantizerSpec):
    """Quantize both streams; returns ({stream: indices}, {stream: dequantized})."""
    indices, recon = {}, {}
    for name, blocks in (("dfd", res.dfd_blocks), ("fd", res.fd_blocks)):
        indices[name], recon[name] = quantize_samples(blocks, q.step)
    return indices, recon


def entropy_rate(symbols) -> float:
    """Zeroth-order empirical entropy in bits per symbol."""
    symbols = np.asarray(symbols).ravel()
    if symbols.size == 0:
        raise InsufficientDataError("cannot take the entropy of an empty stream")
    _, counts = np.unique(symbols, return_counts=True)
    p = counts / symbols.size
    h = float(-np.sum(p * np.log2(p)))
    return h if h > 0 else 0.0


def measure(anchor, target, amap: ActivityMap, field: MotionField, q: QuantizerSpec) -> EmpiricalPoint:
    anchor, target = as_frame(anchor), as_frame(target)
    grid = amap.grid
    res = extract_residuals(anchor, target, amap, field)
    indices, recon = quantize(res, q)

    # prediction (compensated for active blocks, copied for inactive) + dequantized residual
    pred = grid.blocks(motion_compensate(anchor, field))
    rebuilt = pred.copy()
    rebuilt[amap.labels] += recon["dfd"]
    rebuilt[~amap.labels] += recon["fd"]
    original = grid.blocks(target)
    distortion = float(np.mean((rebuilt - original) ** 2))

    lam = amap.lambda_m
    h_dfd = entropy_rate(indices["dfd"]) if indices["dfd"].size else 0.0
    h_fd = entropy_rate(indices["fd"]) if indices["fd"].size else 0.0
    rate_residual = lam * h_dfd + (1 - lam) * h_fd
    rate_mv = lam * rate_motion(field.b_m, grid.block_w, grid.block_h)
    return EmpiricalPoint(rate_mv + rate_residual, rate_mv, rate_residual, distortion, q.step, lam)


def sweep(anchor, target, amap: ActivityMap, field: MotionField, steps) -> list:
    return [measure(anchor, target, amap, field, QuantizerSpec(float(s))) for s in steps]


def pool_points(points, weights=None) -> EmpiricalPoint:
    """Sample-weighted average of per-frame-pair points at one step."""
    points = list(points)
    w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=np.float64)
    w = w / w.sum()

    def avg(attr):
        return float(sum(wi * getattr(p, attr) for wi, p in zip(w, points)))

    rate_mv, rate_residual = avg("rate_mv"), avg("rate_residual")
    return EmpiricalPoint(
        rate_mv + rate_residual, rate_mv, rate_residual, avg("distortion"), points[0].step, avg("lambda_m")
    )


def bound_violations(points, params, slack: float = 0.05) -> list:
    """Points whose total rate falls below the theoretical rate at their distortion minus ``slack``.

    The theoretical side includes the motion-vector rate, like the
    empirical total. Zero-distortion points are exact reconstructions and
    are never violations. Returns ``(point, theoretical_rate)`` pairs.
    """
    bad = []
    for p in points:
        if p.distortion <= 0:
            continue
        theory = rate_combined(params, p.distortion, p.distortion, include_mv=True)
        if p.rate_total < theory - slack:
            bad.append((p, theory))
    return bad
