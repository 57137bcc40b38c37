"""Mask-guided sampling of rain patches and conversion to zero-mean residuals.

A sampled rain patch is turned into a residual by subtracting its per-channel
mean, leaving the streak structure without the local brightness. Residuals
are what later gets quilted onto targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ExtractionError
from .imagecore import ImageBuffer, PatchRef, RainMask, check_bounds, get_patch

# |per-channel mean| allowed in a residual; equals 1e-6 * size^2 on the sum.
MEAN_TOL = 1e-6


@dataclass
class ResidualPatch:
    """Signed zero-mean patch in [-1, 1]; one mean was removed per channel."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise ValueError(f"residual data must be HxWxC, got shape {self.data.shape}")
        if self.data.min() < -1.0 or self.data.max() > 1.0:
            raise ValueError("residual values must lie in [-1, 1]")
        means = self.data.mean(axis=(0, 1))
        if np.abs(means).max() > MEAN_TOL:
            raise ValueError(f"residual channel means must be ~0, got {means}")

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass
class PatchBank:
    """Residual patches plus the exemplar positions they came from."""

    patches: list[ResidualPatch]
    source_refs: list[PatchRef] = field(default_factory=list)

    def __post_init__(self):
        if not self.patches:
            raise ValueError("patch bank must not be empty")
        if len(self.patches) != len(self.source_refs):
            raise ValueError(
                f"{len(self.patches)} patches but {len(self.source_refs)} source refs"
            )
        shape = self.patches[0].data.shape
        for p in self.patches[1:]:
            if p.data.shape != shape:
                raise ValueError(f"mixed patch shapes in bank: {shape} vs {p.data.shape}")

    def __len__(self) -> int:
        return len(self.patches)

    @property
    def patch_size(self) -> int:
        return self.patches[0].size

    @property
    def channels(self) -> int:
        return self.patches[0].channels


def patch_coverage(mask: RainMask, ref: PatchRef) -> float:
    """Fraction of rain pixels inside the patch window."""
    check_bounds(ref, mask.height, mask.width)
    window = mask.data[ref.row : ref.row + ref.size, ref.col : ref.col + ref.size]
    return int(window.sum()) / (ref.size * ref.size)


def enumerate_valid_positions(mask: RainMask, size: int, threshold: float) -> list[PatchRef]:
    """All in-bounds patch positions (row-major, stride 1) with coverage >= threshold.

    An empty result is not an error; callers decide whether that is fatal.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"coverage threshold must be in (0, 1], got {threshold}")
    if size > mask.height or size > mask.width:
        raise DimensionError(
            f"patch size {size} exceeds mask dimensions {mask.height}x{mask.width}"
        )
    # Window sums via a padded integral image; exact integer counts.
    integral = np.pad(mask.data.astype(np.int64).cumsum(axis=0).cumsum(axis=1), ((1, 0), (1, 0)))
    counts = (
        integral[size:, size:]
        - integral[:-size, size:]
        - integral[size:, :-size]
        + integral[:-size, :-size]
    )
    coverage = counts / (size * size)  # same arithmetic as patch_coverage
    rows, cols = np.nonzero(coverage >= threshold)
    return [PatchRef(int(r), int(c), size) for r, c in zip(rows, cols)]


def residual_of(patch: np.ndarray) -> ResidualPatch:
    """Subtract each channel's mean over the window; output sums to ~0 per channel."""
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 3:
        raise ValueError(f"patch must be HxWxC, got shape {patch.shape}")
    return ResidualPatch(patch - patch.mean(axis=(0, 1), keepdims=True))


def sample_rain_patches(
    exemplar: ImageBuffer,
    mask: RainMask,
    size: int,
    threshold: float,
    count: int,
    rng: np.random.Generator,
) -> PatchBank:
    """Draw `count` rain patches uniformly with replacement from valid positions.

    Position indices are drawn in one rng call, so a given (inputs, seed)
    always yields the same bank.
    """
    if count < 1:
        raise ValueError(f"patch count must be >= 1, got {count}")
    if (exemplar.height, exemplar.width) != (mask.height, mask.width):
        raise DimensionError(
            f"exemplar is {exemplar.height}x{exemplar.width} but "
            f"mask is {mask.height}x{mask.width}"
        )
    positions = enumerate_valid_positions(mask, size, threshold)
    if not positions:
        raise ExtractionError(
            f"no patch position reaches rain coverage {threshold}; "
            "lower the coverage threshold or check the mask"
        )
    picks = rng.integers(0, len(positions), size=count)
    refs = [positions[int(i)] for i in picks]
    patches = [residual_of(get_patch(exemplar, ref)) for ref in refs]
    return PatchBank(patches=patches, source_refs=refs)
