"""Raw YUV 4:2:0 input/output and synthetic test sources.

Frames are 2-D ``float64`` numpy arrays holding the luminance plane.
Samples stay real-valued in memory; 8-bit clamping only happens when
writing files.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

KINDS = ("ar1-field", "moving-rect", "white-noise", "constant")


class MalformedInputError(ValueError):
    """Raised when a raw file does not match the declared geometry."""


def as_frame(frame) -> np.ndarray:
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"a frame must be a non-empty 2-D array, got shape {arr.shape}")
    return arr


@dataclass
class VideoSequence:
    frames: np.ndarray  # (n, height, width)
    frame_rate: float = 30.0

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim == 2:
            frames = frames[None]
        if frames.ndim != 3 or 0 in frames.shape:
            raise ValueError(f"frames must have shape (n, height, width), got {frames.shape}")
        self.frames = frames

    def __len__(self):
        return self.frames.shape[0]

    def __getitem__(self, i):
        return self.frames[i]

    def __iter__(self):
        return iter(self.frames)

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    def pairs(self):
        """Consecutive (anchor, target) frame pairs."""
        for k in range(len(self) - 1):
            yield self.frames[k], self.frames[k + 1]


def _frame_bytes(width: int, height: int) -> int:
    return width * height * 3 // 2


def read_raw_yuv420(path, width: int, height: int, frame_rate: float = 30.0) -> VideoSequence:
    """Read the luminance planes of a planar 8-bit YUV 4:2:0 file."""
    if width <= 0 or height <= 0 or width % 2 or height % 2:
        raise MalformedInputError(f"4:2:0 needs positive even dimensions, got {width}x{height}")
    data = np.fromfile(os.fspath(path), dtype=np.uint8)
    per_frame = _frame_bytes(width, height)
    if data.size == 0 or data.size % per_frame:
        raise MalformedInputError(
            f"{path}: {data.size} bytes is not a whole number of {width}x{height} "
            f"4:2:0 frames ({per_frame} bytes each; expected a multiple of {per_frame})"
        )
    n = data.size // per_frame
    luma = data.reshape(n, per_frame)[:, : width * height].reshape(n, height, width)
    return VideoSequence(luma.astype(np.float64), frame_rate)


def to_uint8(frame) -> np.ndarray:
    return np.clip(np.rint(frame), 0, 255).astype(np.uint8)


def write_raw_yuv420(path, sequence: VideoSequence | Sequence[np.ndarray], chroma: int = 128) -> None:
    """Write frames as planar 4:2:0 with flat chroma planes."""
    frames = sequence.frames if isinstance(sequence, VideoSequence) else np.asarray(sequence)
    _, height, width = frames.shape
    if width % 2 or height % 2:
        raise MalformedInputError(f"4:2:0 needs even dimensions, got {width}x{height}")
    uv = np.full(2 * (width // 2) * (height // 2), chroma, dtype=np.uint8)
    with open(path, "wb") as fh:
        for frame in frames:
            fh.write(to_uint8(frame).tobytes())
            fh.write(uv.tobytes())


@dataclass
class SyntheticSpec:
    """Recipe for a synthetic luminance source.

    ``ar1-field`` and ``white-noise`` draw an independent field per frame.
    ``moving-rect`` moves a rectangle of level ``mean + contrast`` by
    ``motion`` pixels per frame; its background is flat at ``mean`` unless
    ``sigma2 > 0``, in which case a fresh AR(1) texture with ``rho`` and
    ``sigma2`` is added to every frame.
    """

    kind: str = "ar1-field"
    rho: float = 0.9
    sigma2: float = 25.0
    mean: float = 128.0
    motion: tuple[int, int] = (0, 0)
    seed: int = 0
    contrast: float = 96.0
    rect_size: tuple[int, int] | None = None  # (w, h); defaults to a quarter of each dimension

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown synthetic kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")
        if self.sigma2 < 0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")
        self.motion = tuple(int(m) for m in self.motion)
        if self.rect_size is not None:
            self.rect_size = tuple(int(s) for s in self.rect_size)

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown synthetic spec fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "SyntheticSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["motion"] = list(self.motion)
        if self.rect_size is not None:
            d["rect_size"] = list(self.rect_size)
        return d


def ar1_field(rng: np.random.Generator, height: int, width: int, rho: float) -> np.ndarray:
    """Unit-variance separable Gauss-Markov field.

    Horizontal and vertical neighbours both have correlation ``rho``; in
    particular the lag-1 correlation along each row of the row-major scan
    is ``rho``.
    """
    w = rng.standard_normal((height, width))
    if rho == 0.0:
        return w
    gain = np.sqrt(1.0 - rho * rho)

    def run(x, axis):
        # first sample drawn from the stationary law, the rest by recursion
        first = np.take(x, [0], axis=axis)
        rest = np.take(x, np.arange(1, x.shape[axis]), axis=axis)
        y, _ = lfilter([gain], [1.0, -rho], rest, axis=axis, zi=rho * first)
        return np.concatenate([first, y], axis=axis)

    return run(run(w, 1), 0)


def rect_origin(spec: SyntheticSpec, width: int, height: int, k: int) -> tuple[int, int]:
    """(x, y) of the rectangle's top-left corner in frame ``k``."""
    return width // 4 + k * spec.motion[0], height // 4 + k * spec.motion[1]


def _rect_size(spec, width, height):
    return spec.rect_size if spec.rect_size is not None else (max(1, width // 4), max(1, height // 4))


def synthesize(spec: SyntheticSpec, width: int, height: int, n_frames: int) -> VideoSequence:
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if width <= 0 or height <= 0:
        raise ValueError(f"dimensions must be positive, got {width}x{height}")
    rng = np.random.default_rng(spec.seed)
    sigma = np.sqrt(spec.sigma2)
    frames = np.empty((n_frames, height, width))
    for k in range(n_frames):
        if spec.kind == "constant":
            frames[k] = spec.mean
        elif spec.kind == "white-noise":
            frames[k] = spec.mean + sigma * rng.standard_normal((height, width))
        elif spec.kind == "ar1-field":
            frames[k] = spec.mean + sigma * ar1_field(rng, height, width, spec.rho)
        else:
            frame = np.full((height, width), spec.mean)
            if spec.sigma2 > 0:
                frame += sigma * ar1_field(rng, height, width, spec.rho)
            x0, y0 = rect_origin(spec, width, height, k)
            rw, rh = _rect_size(spec, width, height)
            xs, xe = max(x0, 0), min(x0 + rw, width)
            ys, ye = max(y0, 0), min(y0 + rh, height)
            if xs < xe and ys < ye:
                frame[ys:ye, xs:xe] += spec.contrast
            frames[k] = frame
    return VideoSequence(frames)


def lag1_scan_correlation(frame) -> float:
    """Pearson correlation of consecutive samples in row-major scan order."""
    x = as_frame(frame).ravel()
    a, b = x[:-1], x[1:]
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return 0.0
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))
