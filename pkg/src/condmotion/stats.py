"""Model parameter estimation from residual streams and the Gaussian fit check."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import ndtr

from .activity import ActivityMap
from .motion import MotionField, ResidualSet


class InsufficientDataError(ValueError):
    pass


@dataclass
class ModelParams:
    sigma2_a: float
    sigma2_i: float
    rho_i: float
    lambda_m: float
    b_m: float = 0.0
    block_w: int = 16
    block_h: int = 16

    def __post_init__(self):
        if self.sigma2_a < 0 or self.sigma2_i < 0:
            raise ValueError("variances must be non-negative")
        if not abs(self.rho_i) < 1:
            raise ValueError(f"rho_i must satisfy |rho_i| < 1, got {self.rho_i}")
        if not 0.0 <= self.lambda_m <= 1.0:
            raise ValueError(f"lambda_m must lie in [0, 1], got {self.lambda_m}")
        if self.b_m < 0:
            raise ValueError("b_m must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=False)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    @classmethod
    def from_json(cls, path) -> "ModelParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def population_variance(x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        return 0.0
    return float(np.mean((x - x.mean()) ** 2))


def pearson(a, b) -> float:
    """Pearson correlation; 0 when either side is constant or empty."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0:
        return 0.0
    da, db = a - a.mean(), b - b.mean()
    den = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if den == 0.0:
        return 0.0
    return float(np.dot(da, db)) / den


def within_block_lag1(blocks) -> float:
    """Mean of horizontal and vertical lag-1 correlations over (n, bh, bw) blocks.

    Neighbour pairs never cross a block boundary.
    """
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.size == 0:
        return 0.0
    rhos = []
    if blocks.shape[2] > 1:
        rhos.append(pearson(blocks[:, :, :-1], blocks[:, :, 1:]))
    if blocks.shape[1] > 1:
        rhos.append(pearson(blocks[:, :-1, :], blocks[:, 1:, :]))
    if not rhos:
        return 0.0
    rho = sum(rhos) / len(rhos)
    # keep strictly inside (-1, 1) for the rate formula
    return float(np.clip(rho, -1 + 1e-12, 1 - 1e-12))


def estimate_params(res: ResidualSet, amap: ActivityMap, field: MotionField) -> ModelParams:
    return ModelParams(
        sigma2_a=population_variance(res.dfd_samples),
        sigma2_i=population_variance(res.fd_samples),
        rho_i=within_block_lag1(res.fd_blocks),
        lambda_m=amap.lambda_m,
        b_m=float(field.b_m),
        block_w=amap.grid.block_w,
        block_h=amap.grid.block_h,
    )


def temporal_lag1(fd_prev, fd_next, mask=None) -> float:
    """Correlation of co-located frame differences in consecutive frame pairs."""
    a = np.asarray(fd_prev, dtype=np.float64)
    b = np.asarray(fd_next, dtype=np.float64)
    if mask is not None:
        a, b = a[mask], b[mask]
    return pearson(a, b)


@dataclass
class FitReport:
    edges: np.ndarray  # bins + 1 finite edges
    masses: np.ndarray  # empirical probability: [underflow, bins..., overflow]
    gaussian_masses: np.ndarray  # same layout, zero-mean Gaussian with the stream variance
    fitted_sigma2: float
    kl_divergence: float
    degenerate: bool = False

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density(self) -> np.ndarray:
        return self.masses[1:-1] / np.diff(self.edges)

    @property
    def gaussian_density(self) -> np.ndarray:
        return self.gaussian_masses[1:-1] / np.diff(self.edges)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_center", "empirical_density", "gaussian_density"])
            for row in zip(self.centers, self.density, self.gaussian_density):
                w.writerow([repr(float(v)) for v in row])


def fit_gauss_markov(res: ResidualSet | np.ndarray, bins: int = 64, width_sigmas: float = 4.0) -> FitReport:
    """Compare the FD histogram against a zero-mean Gaussian of the same variance.

    ``bins`` equal bins cover ``[-width_sigmas*sigma, +width_sigmas*sigma]``;
    samples beyond fall into one underflow and one overflow bin. KL
    divergence is in nats over nonempty bins.
    """
    x = res.fd_samples if isinstance(res, ResidualSet) else np.asarray(res, dtype=np.float64).ravel()
    if x.size == 0:
        raise InsufficientDataError("no frame-difference samples to fit")
    if bins < 8:
        raise ValueError("need at least 8 bins")
    sigma2 = population_variance(x)
    if sigma2 == 0.0:
        empty = np.zeros(0)
        return FitReport(empty, np.ones(1), np.ones(1), 0.0, math.inf, degenerate=True)
    sigma = math.sqrt(sigma2)
    half = width_sigmas * sigma
    edges = np.linspace(-half, half, bins + 1)
    counts = np.histogram(x, bins=edges)[0].astype(np.float64)
    under = float(np.count_nonzero(x < -half))
    over = float(np.count_nonzero(x > half))
    p = np.concatenate([[under], counts, [over]]) / x.size
    cdf = ndtr(edges / sigma)
    q = np.concatenate([[cdf[0]], np.diff(cdf), [1.0 - cdf[-1]]])
    nz = p > 0
    kl = float(np.sum(p[nz] * np.log(p[nz] / q[nz])))
    return FitReport(edges, p, q, sigma2, max(kl, 0.0))
