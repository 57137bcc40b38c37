"""Overlap error surfaces, minimum-error boundary cuts, and seam blending.

The boundary cut is the classic dynamic program over an overlap error
matrix: cumulative cost C[i,j] = E[i,j] + min(C[i-1,j-1], C[i-1,j],
C[i-1,j+1]) with out-of-range neighbors treated as +inf, then a backtrack
from the cheapest final-row cell. Every argmin prefers the smallest index,
so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass
class SeamPath:
    """A monotone cut: one column index per row, |cols[i+1]-cols[i]| <= 1.

    For horizontal cuts the entries are row indices, one per column.
    `cost` is the sequential top-to-bottom sum of matrix entries on the path.
    """

    cols: np.ndarray
    cost: float

    def __post_init__(self):
        self.cols = np.asarray(self.cols, dtype=np.int64)


def _as_error_matrix(E) -> np.ndarray:
    E = np.asarray(E, dtype=np.float64)
    if E.ndim != 2 or E.shape[0] < 1 or E.shape[1] < 1:
        raise ValueError(f"error matrix must be 2-D and nonempty, got shape {E.shape}")
    if not np.all(np.isfinite(E)) or E.min() < 0.0:
        raise ValueError("error matrix entries must be finite and >= 0")
    return E


def overlap_error_surface(existing: np.ndarray, incoming: np.ndarray) -> np.ndarray:
    """Per-pixel squared difference summed over channels, E[i,j] = sum_c (a-b)^2."""
    existing = np.asarray(existing, dtype=np.float64)
    incoming = np.asarray(incoming, dtype=np.float64)
    if existing.shape != incoming.shape or existing.ndim != 3:
        raise DimensionError(
            f"overlap regions must share an HxWxC shape, got {existing.shape} vs {incoming.shape}"
        )
    return ((existing - incoming) ** 2).sum(axis=2)


def min_cut_vertical(E) -> SeamPath:
    """Minimum-cost monotone top-to-bottom path through E.

    Ties prefer the smallest column index, both at the final-row argmin and
    at every backtracking step.
    """
    E = _as_error_matrix(E)
    rows, cols = E.shape
    C = np.empty_like(E)
    C[0] = E[0]
    for i in range(1, rows):
        padded = np.pad(C[i - 1], 1, constant_values=np.inf)
        C[i] = E[i] + np.minimum(np.minimum(padded[:-2], padded[1:-1]), padded[2:])

    path = np.empty(rows, dtype=np.int64)
    j = int(np.argmin(C[-1]))  # first occurrence = smallest index
    path[-1] = j
    for i in range(rows - 2, -1, -1):
        lo = max(0, j - 1)
        j = lo + int(np.argmin(C[i, lo : min(cols, j + 2)]))
        path[i] = j
    return SeamPath(cols=path, cost=float(C[rows - 1, path[-1]]))


def min_cut_horizontal(E) -> SeamPath:
    """Left-to-right cut: min_cut_vertical on the transpose, entries are row indices."""
    E = _as_error_matrix(E)
    return min_cut_vertical(E.T)


def seam_to_mask(block_size: int, overlap: int, vseam: SeamPath | None, hseam: SeamPath | None) -> np.ndarray:
    """Binary ownership mask for an incoming block (1 = incoming, 0 = canvas).

    In the left width-`overlap` strip a pixel goes to the incoming block at
    columns >= vseam; in the top strip at rows >= hseam; in the corner where
    both strips overlap the grants are intersected. Everywhere else the
    incoming block owns the pixel.
    """
    if not 0 < overlap < block_size:
        raise ValueError(f"need 0 < overlap < block size, got overlap={overlap}, block={block_size}")
    v = np.ones((block_size, block_size), dtype=bool)
    if vseam is not None:
        if len(vseam.cols) != block_size:
            raise DimensionError(
                f"vertical seam has {len(vseam.cols)} entries, block size is {block_size}"
            )
        v[:, :overlap] = np.arange(overlap)[None, :] >= vseam.cols[:, None]
    h = np.ones((block_size, block_size), dtype=bool)
    if hseam is not None:
        if len(hseam.cols) != block_size:
            raise DimensionError(
                f"horizontal seam has {len(hseam.cols)} entries, block size is {block_size}"
            )
        h[:overlap, :] = np.arange(overlap)[:, None] >= hseam.cols[None, :]
    return (v & h).astype(np.float64)


def _box_average(mask: np.ndarray, radius: int) -> np.ndarray:
    """Separable box mean of width 2*radius+1 with edge replication.

    Pass order is fixed (axis 0 then axis 1; offsets summed from -radius to
    +radius, then divided) so results are reproducible bit-for-bit.
    """
    out = mask
    for axis in (0, 1):
        n = out.shape[axis]
        acc = np.zeros_like(out)
        for off in range(-radius, radius + 1):
            idx = np.clip(np.arange(n) + off, 0, n - 1)
            acc = acc + np.take(out, idx, axis=axis)
        out = acc / (2 * radius + 1)
    return out


def blend(canvas_region: np.ndarray, incoming: np.ndarray, mask: np.ndarray, feather: int) -> np.ndarray:
    """Combine incoming into the canvas region under per-pixel weights.

    feather = 0 keeps the mask binary (hard cut: each output pixel equals one
    of the two inputs exactly). feather > 0 box-smooths the mask first, then
    mixes; weight-1 pixels still return the incoming values untouched.
    """
    canvas_region = np.asarray(canvas_region, dtype=np.float64)
    incoming = np.asarray(incoming, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if canvas_region.shape != incoming.shape or canvas_region.ndim != 3:
        raise DimensionError(
            f"blend regions must share an HxWxC shape, got {canvas_region.shape} vs {incoming.shape}"
        )
    if mask.shape != canvas_region.shape[:2]:
        raise DimensionError(
            f"mask shape {mask.shape} does not match region {canvas_region.shape[:2]}"
        )
    if feather < 0:
        raise ValueError(f"feather must be >= 0, got {feather}")
    w = mask if feather == 0 else np.clip(_box_average(mask, feather), 0.0, 1.0)
    w = w[:, :, None]
    # w=1 selects incoming outright; elsewhere walk from the canvas value so
    # equal inputs (and w=0) pass through without rounding drift.
    return np.where(w >= 1.0, incoming, canvas_region + w * (incoming - canvas_region))
