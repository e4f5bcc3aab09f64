"""Diamond-search block matching and residual extraction.

Motion vectors point into the anchor frame: a target block at origin
``(x, y)`` with vector ``(dx, dy)`` is predicted by the anchor block at
``(x + dx, y + dy)``. Content that moves by ``(+3, +2)`` between anchor
and target therefore yields the vector ``(-3, -2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .activity import ActivityMap, BlockGrid
from .frames import as_frame

LARGE_DIAMOND = ((0, 0), (2, 0), (-2, 0), (0, 2), (0, -2), (1, 1), (1, -1), (-1, 1), (-1, -1))
SMALL_DIAMOND = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))


def default_mv_bits(search_range: int) -> int:
    """Fixed-length code: ceil(log2(2r + 1)) bits for each component."""
    return 2 * math.ceil(math.log2(2 * search_range + 1))


@dataclass(frozen=True)
class MotionVector:
    dx: int
    dy: int


@dataclass
class MotionField:
    grid: BlockGrid
    vectors: dict  # (row, col) -> MotionVector, active blocks only
    search_range: int = 15
    b_m: float | None = None

    def __post_init__(self):
        if self.b_m is None:
            self.b_m = default_mv_bits(self.search_range)

    def vector(self, r: int, c: int) -> MotionVector:
        return self.vectors.get((r, c), MotionVector(0, 0))

    def to_dict(self) -> dict:
        rows = []
        for r in range(self.grid.rows):
            row = []
            for c in range(self.grid.cols):
                mv = self.vectors.get((r, c))
                row.append(None if mv is None else {"dx": mv.dx, "dy": mv.dy})
            rows.append(row)
        return {"search_range": self.search_range, "b_m": self.b_m, "vectors": rows}

    @classmethod
    def zero(cls, grid: BlockGrid, search_range: int = 15, b_m=None) -> "MotionField":
        return cls(grid, {}, search_range, b_m)


@dataclass
class ResidualSet:
    """Signed residual samples kept block-shaped: (n_blocks, block_h, block_w)."""

    dfd_blocks: np.ndarray
    fd_blocks: np.ndarray

    @property
    def dfd_samples(self) -> np.ndarray:
        return self.dfd_blocks.ravel()

    @property
    def fd_samples(self) -> np.ndarray:
        return self.fd_blocks.ravel()

    @classmethod
    def pool(cls, sets) -> "ResidualSet":
        sets = list(sets)
        return cls(
            np.concatenate([s.dfd_blocks for s in sets]),
            np.concatenate([s.fd_blocks for s in sets]),
        )


def _ssd(block, ref):
    d = block - ref
    return float(np.einsum("ij,ij->", d, d))


def _check_block(frame, x, y, grid):
    h, w = frame.shape
    if x < 0 or y < 0 or x + grid.block_w > w or y + grid.block_h > h:
        raise ValueError(f"block at ({x}, {y}) does not fit inside a {w}x{h} frame")


def diamond_search(anchor, target, block_origin, grid: BlockGrid, search_range: int = 15):
    """Two-stage diamond search seeded at zero displacement.

    Returns ``(MotionVector, ssd)``. Candidates outside ``search_range`` or
    reading outside the anchor are skipped. Equal costs are resolved by
    smallest ``|dx| + |dy|``, then smallest ``dy``, then smallest ``dx``.
    """
    anchor, target = as_frame(anchor), as_frame(target)
    x0, y0 = block_origin
    bw, bh = grid.block_w, grid.block_h
    _check_block(target, x0, y0, grid)
    _check_block(anchor, x0, y0, grid)
    block = target[y0 : y0 + bh, x0 : x0 + bw]
    h, w = anchor.shape
    costs = {}

    def cost(dx, dy):
        if (dx, dy) not in costs:
            costs[(dx, dy)] = _ssd(block, anchor[y0 + dy : y0 + dy + bh, x0 + dx : x0 + dx + bw])
        return costs[(dx, dy)]

    def valid(dx, dy):
        return (
            abs(dx) <= search_range
            and abs(dy) <= search_range
            and 0 <= x0 + dx <= w - bw
            and 0 <= y0 + dy <= h - bh
        )

    def best_of(center, pattern):
        cands = [(center[0] + px, center[1] + py) for px, py in pattern]
        cands = [c for c in cands if valid(*c)]
        return min(cands, key=lambda c: (cost(*c), abs(c[0]) + abs(c[1]), c[1], c[0]))

    center = (0, 0)
    # each move strictly decreases (cost, tie key), so this terminates
    while True:
        nxt = best_of(center, LARGE_DIAMOND)
        if nxt == center:
            break
        center = nxt
    center = best_of(center, SMALL_DIAMOND)
    return MotionVector(*center), cost(*center)


def full_search(anchor, target, block_origin, grid: BlockGrid, search_range: int = 15):
    """Exhaustive search over the same window; reference oracle for diamond_search."""
    anchor, target = as_frame(anchor), as_frame(target)
    x0, y0 = block_origin
    bw, bh = grid.block_w, grid.block_h
    _check_block(target, x0, y0, grid)
    block = target[y0 : y0 + bh, x0 : x0 + bw]
    h, w = anchor.shape
    best = None
    for dy in range(-search_range, search_range + 1):
        for dx in range(-search_range, search_range + 1):
            if not (0 <= x0 + dx <= w - bw and 0 <= y0 + dy <= h - bh):
                continue
            c = _ssd(block, anchor[y0 + dy : y0 + dy + bh, x0 + dx : x0 + dx + bw])
            key = (c, abs(dx) + abs(dy), dy, dx)
            if best is None or key < best[0]:
                best = (key, MotionVector(dx, dy), c)
    return best[1], best[2]


def estimate_motion(anchor, target, amap: ActivityMap, search_range: int = 15, b_m=None) -> MotionField:
    """Run diamond search for every active block of ``amap``."""
    grid = amap.grid
    vectors = {}
    for r, c in zip(*np.nonzero(amap.labels)):
        mv, _ = diamond_search(anchor, target, grid.origin(r, c), grid, search_range)
        vectors[(int(r), int(c))] = mv
    return MotionField(grid, vectors, search_range, b_m)


def motion_compensate(anchor, field: MotionField) -> np.ndarray:
    anchor = as_frame(anchor)
    grid = field.grid
    out = grid.crop(anchor).copy()
    h, w = anchor.shape
    bw, bh = grid.block_w, grid.block_h
    for (r, c), mv in field.vectors.items():
        x, y = grid.origin(r, c)
        sx, sy = x + mv.dx, y + mv.dy
        if not (0 <= sx <= w - bw and 0 <= sy <= h - bh):
            raise AssertionError(f"vector {mv} for block ({r}, {c}) reads outside the anchor")
        out[y : y + bh, x : x + bw] = anchor[sy : sy + bh, sx : sx + bw]
    return out


def extract_residuals(anchor, target, amap: ActivityMap, field: MotionField) -> ResidualSet:
    """Signed DFD over active blocks and FD over inactive blocks."""
    anchor, target = as_frame(anchor), as_frame(target)
    if anchor.shape != target.shape:
        raise ValueError(f"frame shapes differ: {anchor.shape} vs {target.shape}")
    grid = amap.grid
    if field.grid != grid:
        raise ValueError("activity map and motion field use different grids")
    if set(field.vectors) - {tuple(map(int, rc)) for rc in zip(*np.nonzero(amap.labels))}:
        raise ValueError("motion field has vectors for inactive blocks")
    t = grid.blocks(target)
    dfd = t - grid.blocks(motion_compensate(anchor, field))
    fd = t - grid.blocks(anchor)
    labels = amap.labels
    return ResidualSet(dfd[labels].copy(), fd[~labels].copy())
