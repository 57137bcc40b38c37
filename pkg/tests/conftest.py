"""Shared fixture builders: synthetic exemplars, masks, targets, CLI trees."""

from types import SimpleNamespace

import numpy as np
import pytest

from rainweave import ImageBuffer, PatchBank, PatchRef, RainMask, ResidualPatch
from rainweave.imagecore import save_image


def quantize(arr):
    """Snap values onto the k/255 grid the 8-bit codec reproduces exactly."""
    return np.floor(np.asarray(arr, dtype=np.float64) * 255.0 + 0.5) / 255.0


def dyadic(arr):
    """Snap values onto the k/256 grid, where float sums/differences are exact."""
    return np.floor(np.asarray(arr, dtype=np.float64) * 256.0) / 256.0


def striped_exemplar(height=160, width=200, channels=3, seed=11):
    """Rain-like exemplar: dark base with bright diagonal streaks, plus its mask.

    The streaked band occupies the middle rows so threshold choices matter.
    """
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.05, 0.25, size=(height, width, channels))
    rr, cc = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    streaks = ((rr + 2 * cc) % 9) < 2
    img = np.where(streaks[:, :, None], base + 0.6, base)
    mask = np.zeros((height, width), dtype=bool)
    mask[8 : height - 8, 8 : width - 8] = True
    return ImageBuffer(quantize(np.clip(img, 0.0, 1.0))), RainMask(mask)


def smooth_target(height=96, width=128, channels=3, seed=3):
    """Low-contrast midtone image; headroom on both sides for rain residuals."""
    rng = np.random.default_rng(seed)
    rr, cc = np.meshgrid(np.linspace(0, 1, height), np.linspace(0, 1, width), indexing="ij")
    grad = 0.35 + 0.3 * rr[:, :, None] + 0.1 * cc[:, :, None]
    img = grad + rng.uniform(-0.05, 0.05, size=(height, width, channels))
    return ImageBuffer(quantize(np.clip(img, 0.0, 1.0)))


def dyadic_bank(count, size, channels=3, seed=5, amplitude=48):
    """Bank of residual patches on the k/16384 grid, |values| < 0.5.

    Integer codes in [-amplitude, amplitude]/256 minus their per-channel mean
    stay dyadic, so sums with dyadic targets round nowhere.
    """
    rng = np.random.default_rng(seed)
    patches = []
    refs = []
    for k in range(count):
        codes = rng.integers(-amplitude, amplitude + 1, size=(size, size, channels))
        data = codes.astype(np.float64) / 256.0
        data = data - data.mean(axis=(0, 1), keepdims=True)
        patches.append(ResidualPatch(data))
        refs.append(PatchRef(0, k, size))
    return PatchBank(patches=patches, source_refs=refs)


@pytest.fixture
def cli_tree(tmp_path):
    """PNG working set on disk: striped exemplar, mask, two targets."""
    exemplar, mask = striped_exemplar()
    ex_path = tmp_path / "exemplar.png"
    mask_path = tmp_path / "mask.png"
    save_image(exemplar, ex_path)
    save_image(ImageBuffer(mask.data.astype(np.float64)[:, :, None]), mask_path)
    targets = []
    for i, seed in enumerate((21, 22)):
        t = smooth_target(seed=seed)
        p = tmp_path / f"scene{i}.png"
        save_image(t, p)
        targets.append(p)
    return SimpleNamespace(
        root=tmp_path, exemplar=ex_path, mask=mask_path, targets=targets
    )
