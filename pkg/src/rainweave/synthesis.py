"""Raster-scan rain transfer over whole images and patch-pair generation.

transfer() keeps a signed residual canvas: every grid block blends one
randomly drawn residual patch in behind a minimum-error boundary cut, and
the target is only added (and clamped) once at the very end. This keeps
overlap arithmetic order-independent of clamping.

All randomness flows through numpy PCG64 generators built by derive_rng(),
so one 64-bit seed pins every output bit-exactly. Stream layout:
(seed, 0) samples the patch bank, (seed, 1, i) drives transfer onto target
i, (seed, 2) draws dataset pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DimensionError, ExtractionError
from .extraction import PatchBank, ResidualPatch
from .imagecore import ImageBuffer, PatchRef, get_patch
from .quilting import blend, min_cut_horizontal, min_cut_vertical, overlap_error_surface, seam_to_mask

STREAM_BANK = 0
STREAM_TRANSFER = 1
STREAM_PAIRS = 2


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Deterministic PCG64 stream for (seed, *path); independent per path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, path)])))


def default_overlap(patch_size: int) -> int:
    """Default overlap strip width: patch_size/6 rounded half-up, at least 2."""
    return max(2, int(patch_size / 6 + 0.5))


@dataclass
class TransferConfig:
    """Free parameters of the pipeline; defaults suit ~32 px rain streaks."""

    patch_size: int = 32
    overlap: int | None = None
    coverage_threshold: float = 0.6
    bank_count: int = 2000
    feather: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.patch_size < 2:
            raise ValueError(f"patch size must be >= 2, got {self.patch_size}")
        if self.overlap is None:
            self.overlap = default_overlap(self.patch_size)
        if not 0 < self.overlap < self.patch_size:
            raise ValueError(
                f"need 0 < overlap < patch size, got overlap={self.overlap}, patch={self.patch_size}"
            )
        if not 0.0 < self.coverage_threshold <= 1.0:
            raise ValueError(f"coverage threshold must be in (0, 1], got {self.coverage_threshold}")
        if self.bank_count < 1:
            raise ValueError(f"bank count must be >= 1, got {self.bank_count}")
        if self.feather < 0:
            raise ValueError(f"feather must be >= 0, got {self.feather}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def as_dict(self) -> dict:
        return {
            "patch_size": self.patch_size,
            "overlap": self.overlap,
            "coverage_threshold": self.coverage_threshold,
            "bank_count": self.bank_count,
            "feather": self.feather,
            "seed": self.seed,
        }


@dataclass
class PairRecord:
    """One aligned (clean, rain) training patch couple and where it came from."""

    target_patch: np.ndarray
    synthetic_patch: np.ndarray
    target_ref: PatchRef
    residual_index: int
    target_index: int


class BlockTrace(NamedTuple):
    """Per-block instrumentation handed to transfer()'s on_block hook."""

    ref: PatchRef
    residual_index: int
    mask: np.ndarray
    canvas_before: np.ndarray
    incoming: np.ndarray


def compose_patch(residual: ResidualPatch, target_patch: np.ndarray) -> np.ndarray:
    """Synthetic rain patch: target plus residual, clamped to [0, 1]."""
    target_patch = np.asarray(target_patch, dtype=np.float64)
    if target_patch.shape != residual.data.shape:
        raise DimensionError(
            f"target patch {target_patch.shape} does not match residual {residual.data.shape}"
        )
    return np.clip(target_patch + residual.data, 0.0, 1.0)


def plan_grid(target_height: int, target_width: int, cfg: TransferConfig) -> list[PatchRef]:
    """Raster-order block positions with step = patch_size - overlap.

    A block that would overrun an edge is shifted back flush with it (its
    overlap with the previous block grows), so every pixel is covered.
    """
    size = cfg.patch_size
    if target_height < size or target_width < size:
        raise DimensionError(
            f"target {target_height}x{target_width} is smaller than patch size {size}"
        )
    step = size - cfg.overlap

    def starts(extent: int) -> list[int]:
        out, pos = [], 0
        while pos + size < extent:
            out.append(pos)
            pos += step
        out.append(extent - size)  # flush with the edge
        return out

    return [
        PatchRef(r, c, size) for r in starts(target_height) for c in starts(target_width)
    ]


def transfer(
    target: ImageBuffer,
    bank: PatchBank,
    cfg: TransferConfig,
    rng: np.random.Generator,
    on_block: Callable[[BlockTrace], None] | None = None,
) -> ImageBuffer:
    """Quilt random residual patches over the whole target along a raster scan.

    Residual indices for all blocks come from a single rng.integers call and
    are consumed in raster order. Each block is seam-cut against the already
    committed residual canvas (left/top strips of width cfg.overlap where a
    committed neighbor exists) and blended in; the final image is
    clamp(target + canvas).

    on_block, when given, receives a BlockTrace per block before its blend
    is committed (instrumentation for tests and diagnostics).
    """
    if len(bank) == 0:
        raise ExtractionError("patch bank is empty")
    if bank.patch_size != cfg.patch_size:
        raise DimensionError(
            f"bank patches are {bank.patch_size} px but config patch size is {cfg.patch_size}"
        )
    if bank.channels != target.channels:
        raise DimensionError(
            f"bank has {bank.channels} channels but target has {target.channels}"
        )
    grid = plan_grid(target.height, target.width, cfg)
    draws = rng.integers(0, len(bank), size=len(grid))
    size, overlap = cfg.patch_size, cfg.overlap
    canvas = np.zeros_like(target.data)

    for ref, raw_idx in zip(grid, draws):
        idx = int(raw_idx)
        incoming = bank.patches[idx].data
        r, c = ref.row, ref.col
        vseam = hseam = None
        if c > 0:  # a committed block sits to the left
            vseam = min_cut_vertical(
                overlap_error_surface(canvas[r : r + size, c : c + overlap], incoming[:, :overlap])
            )
        if r > 0:  # committed content above spans the full row
            hseam = min_cut_horizontal(
                overlap_error_surface(canvas[r : r + overlap, c : c + size], incoming[:overlap, :])
            )
        mask = seam_to_mask(size, overlap, vseam, hseam)
        region = canvas[r : r + size, c : c + size]
        if on_block is not None:
            on_block(BlockTrace(ref, idx, mask, region.copy(), incoming))
        canvas[r : r + size, c : c + size] = blend(region, incoming, mask, cfg.feather)

    return ImageBuffer(np.clip(target.data + canvas, 0.0, 1.0))


def generate_pairs(
    targets: list[ImageBuffer],
    bank: PatchBank,
    pair_count: int,
    cfg: TransferConfig,
    rng: np.random.Generator,
) -> list[PairRecord]:
    """Draw (clean, rain) patch pairs at random positions; no quilting involved.

    Per record the rng draws, in order: target index, row, col, residual
    index. Pairs are independent; overlaps between them are fine.
    """
    if pair_count < 0:
        raise ValueError(f"pair count must be >= 0, got {pair_count}")
    if not targets:
        raise ValueError("need at least one target image")
    if len(bank) == 0:
        raise ExtractionError("patch bank is empty")
    size = cfg.patch_size
    for i, t in enumerate(targets):
        if t.height < size or t.width < size:
            raise DimensionError(
                f"target {i} is {t.height}x{t.width}, smaller than patch size {size}"
            )
        if t.channels != bank.channels:
            raise DimensionError(
                f"target {i} has {t.channels} channels but bank has {bank.channels}"
            )

    records = []
    for _ in range(pair_count):
        ti = int(rng.integers(0, len(targets)))
        t = targets[ti]
        row = int(rng.integers(0, t.height - size + 1))
        col = int(rng.integers(0, t.width - size + 1))
        ki = int(rng.integers(0, len(bank)))
        ref = PatchRef(row, col, size)
        clean = get_patch(t, ref)
        records.append(
            PairRecord(
                target_patch=clean,
                synthetic_patch=compose_patch(bank.patches[ki], clean),
                target_ref=ref,
                residual_index=ki,
                target_index=ti,
            )
        )
    return records
