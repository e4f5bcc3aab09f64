"""Difference images and active/inactive block classification."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import as_frame


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Thresholds:
    t_g: float = 15.0  # pixel level: |difference| must exceed this
    t_p: int | None = None  # block level: active-pixel count must exceed this; None means area // 8

    def resolve(self, grid: "BlockGrid") -> "Thresholds":
        t_p = grid.area // 8 if self.t_p is None else self.t_p
        if self.t_g < 0 or t_p < 0:
            raise ConfigurationError("thresholds must be non-negative")
        if t_p > grid.area:
            raise ConfigurationError(f"t_p={t_p} exceeds the block area {grid.area}")
        return Thresholds(self.t_g, t_p)


@dataclass(frozen=True)
class BlockGrid:
    block_w: int
    block_h: int
    cols: int
    rows: int

    @classmethod
    def for_frame(cls, width: int, height: int, block_w: int = 16, block_h: int | None = None) -> "BlockGrid":
        block_h = block_w if block_h is None else block_h
        if block_w <= 0 or block_h <= 0:
            raise ConfigurationError("block dimensions must be positive")
        if block_w > width or block_h > height:
            raise ConfigurationError(f"block {block_w}x{block_h} is larger than frame {width}x{height}")
        return cls(block_w, block_h, width // block_w, height // block_h)

    @property
    def area(self) -> int:
        return self.block_w * self.block_h

    @property
    def width(self) -> int:
        """Usable (cropped) width."""
        return self.cols * self.block_w

    @property
    def height(self) -> int:
        return self.rows * self.block_h

    @property
    def n_blocks(self) -> int:
        return self.rows * self.cols

    def crop(self, frame) -> np.ndarray:
        frame = as_frame(frame)
        if frame.shape[0] < self.height or frame.shape[1] < self.width:
            raise ConfigurationError(f"frame {frame.shape[::-1]} is smaller than the grid coverage")
        return frame[: self.height, : self.width]

    def blocks(self, frame) -> np.ndarray:
        """View of the cropped frame as (rows, cols, block_h, block_w)."""
        c = self.crop(frame)
        return c.reshape(self.rows, self.block_h, self.cols, self.block_w).swapaxes(1, 2)

    def origin(self, r: int, c: int) -> tuple[int, int]:
        return c * self.block_w, r * self.block_h


@dataclass
class ActivityMap:
    grid: BlockGrid
    labels: np.ndarray  # (rows, cols) bool, True = active
    pixel_mask: np.ndarray  # (height, width) bool over the cropped region
    lambda_m: float

    @property
    def n_active(self) -> int:
        return int(self.labels.sum())

    def to_dict(self) -> dict:
        g = self.grid
        return {
            "grid": {"block_w": g.block_w, "block_h": g.block_h, "cols": g.cols, "rows": g.rows},
            "labels": self.labels.astype(int).tolist(),
            "lambda_m": self.lambda_m,
        }


def difference_image(anchor, target) -> np.ndarray:
    anchor, target = as_frame(anchor), as_frame(target)
    if anchor.shape != target.shape:
        raise ValueError(f"frame shapes differ: {anchor.shape} vs {target.shape}")
    return np.abs(target - anchor)


def classify(diff, grid: BlockGrid, th: Thresholds = Thresholds()) -> ActivityMap:
    diff = as_frame(diff)
    if grid.block_w > diff.shape[1] or grid.block_h > diff.shape[0]:
        raise ConfigurationError("block larger than frame")
    th = th.resolve(grid)
    mask = grid.crop(diff) > th.t_g
    counts = grid.blocks(mask).sum(axis=(2, 3))
    labels = counts > th.t_p
    return ActivityMap(grid, labels, mask, float(labels.mean()))


def active_pixel_counts(amap: ActivityMap) -> np.ndarray:
    return amap.grid.blocks(amap.pixel_mask).sum(axis=(2, 3))
