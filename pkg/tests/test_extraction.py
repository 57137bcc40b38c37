"""Mask-guided patch sampling and zero-mean residual conversion."""

import numpy as np
import pytest

from rainweave import (
    BoundsError,
    DimensionError,
    ExtractionError,
    ImageBuffer,
    PatchBank,
    PatchRef,
    RainMask,
    ResidualPatch,
    enumerate_valid_positions,
    get_patch,
    patch_coverage,
    residual_of,
    sample_rain_patches,
)
from rainweave.synthesis import derive_rng


def test_patch_coverage_counting():
    mask = RainMask(np.ones((6, 6), dtype=bool))
    assert patch_coverage(mask, PatchRef(0, 0, 4)) == 1.0
    mask = RainMask(np.zeros((6, 6), dtype=bool))
    assert patch_coverage(mask, PatchRef(1, 1, 4)) == 0.0
    data = np.zeros((6, 6), dtype=bool)
    data[0:2, 0:4] = True  # 8 of the 16 window pixels
    assert patch_coverage(RainMask(data), PatchRef(0, 0, 4)) == 0.5


def test_patch_coverage_bounds():
    mask = RainMask(np.ones((5, 5), dtype=bool))
    with pytest.raises(BoundsError):
        patch_coverage(mask, PatchRef(3, 0, 4))


def test_enumerate_all_true_10x10():
    mask = RainMask(np.ones((10, 10), dtype=bool))
    refs = enumerate_valid_positions(mask, 4, 1.0)
    assert len(refs) == 49
    assert refs[0] == PatchRef(0, 0, 4)
    assert refs[1] == PatchRef(0, 1, 4)  # row-major, stride 1
    assert refs[7] == PatchRef(1, 0, 4)
    assert refs[-1] == PatchRef(6, 6, 4)


def test_enumerate_all_false_and_corner():
    assert enumerate_valid_positions(RainMask(np.zeros((10, 10), dtype=bool)), 4, 0.5) == []
    data = np.zeros((10, 10), dtype=bool)
    data[0:4, 0:4] = True
    refs = enumerate_valid_positions(RainMask(data), 4, 1.0)
    assert refs == [PatchRef(0, 0, 4)]


def test_enumerate_validation():
    mask = RainMask(np.ones((5, 5), dtype=bool))
    with pytest.raises(DimensionError, match="exceeds mask"):
        enumerate_valid_positions(mask, 6, 0.5)
    with pytest.raises(ValueError):
        enumerate_valid_positions(mask, 4, 0.0)
    with pytest.raises(ValueError):
        enumerate_valid_positions(mask, 4, 1.2)


def test_enumerate_matches_direct_recount():
    rng = np.random.default_rng(42)
    for _ in range(10):
        mask = RainMask(rng.random((24, 30)) < 0.55)
        size = int(rng.integers(2, 7))
        threshold = float(rng.uniform(0.2, 0.9))
        got = enumerate_valid_positions(mask, size, threshold)
        expected = [
            PatchRef(r, c, size)
            for r in range(mask.height - size + 1)
            for c in range(mask.width - size + 1)
            if patch_coverage(mask, PatchRef(r, c, size)) >= threshold
        ]
        assert got == expected


def test_residual_of_constant_patch_is_zero():
    res = residual_of(np.full((5, 5, 3), 0.5))
    assert np.array_equal(res.data, np.zeros((5, 5, 3)))


def test_residual_of_two_pixel_example():
    res = residual_of(np.array([[[0.2], [0.8]]]))
    assert np.allclose(res.data, [[[-0.3], [0.3]]], atol=1e-15)


def test_residual_sums_and_recovery():
    rng = np.random.default_rng(7)
    patch = rng.random((8, 8, 3))
    res = residual_of(patch)
    sums = res.data.sum(axis=(0, 1))
    assert np.all(np.abs(sums) <= 1e-6 * 64)
    # re-adding the mean recovers the input to within a couple of ulp;
    # float64 cannot promise (x - m) + m == x bitwise
    means = patch.mean(axis=(0, 1), keepdims=True)
    assert np.max(np.abs((res.data + means) - patch)) <= 2.0**-50


def test_residual_patch_validation():
    with pytest.raises(ValueError, match="-1, 1"):
        ResidualPatch(np.full((2, 2, 1), 1.5))
    with pytest.raises(ValueError, match="means"):
        ResidualPatch(np.full((2, 2, 1), 0.25))
    with pytest.raises(ValueError):
        residual_of(np.zeros((4, 4)))  # missing channel axis


def test_patch_bank_validation():
    patch = residual_of(np.random.default_rng(0).random((4, 4, 3)))
    other = residual_of(np.random.default_rng(1).random((5, 5, 3)))
    ref = PatchRef(0, 0, 4)
    with pytest.raises(ValueError, match="empty"):
        PatchBank(patches=[], source_refs=[])
    with pytest.raises(ValueError):
        PatchBank(patches=[patch], source_refs=[])
    with pytest.raises(ValueError, match="mixed"):
        PatchBank(patches=[patch, other], source_refs=[ref, ref])
    bank = PatchBank(patches=[patch, patch], source_refs=[ref, ref])
    assert len(bank) == 2
    assert bank.patch_size == 4
    assert bank.channels == 3


def _exemplar_and_mask(seed=0):
    rng = np.random.default_rng(seed)
    exemplar = ImageBuffer(rng.random((40, 50, 3)))
    mask = RainMask(rng.random((40, 50)) < 0.7)
    return exemplar, mask


def test_sample_rain_patches_bank_is_rederivable():
    exemplar, mask = _exemplar_and_mask()
    bank = sample_rain_patches(exemplar, mask, 8, 0.5, 25, derive_rng(3, 0))
    assert len(bank) == 25
    for res, ref in zip(bank.patches, bank.source_refs):
        assert patch_coverage(mask, ref) >= 0.5
        redone = residual_of(get_patch(exemplar, ref))
        assert np.array_equal(res.data, redone.data)


def test_sample_rain_patches_deterministic():
    exemplar, mask = _exemplar_and_mask()
    a = sample_rain_patches(exemplar, mask, 8, 0.5, 10, derive_rng(9, 0))
    b = sample_rain_patches(exemplar, mask, 8, 0.5, 10, derive_rng(9, 0))
    assert a.source_refs == b.source_refs
    c = sample_rain_patches(exemplar, mask, 8, 0.5, 10, derive_rng(10, 0))
    assert a.source_refs != c.source_refs


def test_sample_rain_patches_errors():
    exemplar, mask = _exemplar_and_mask()
    small_mask = RainMask(mask.data[:30])
    with pytest.raises(DimensionError, match=r"40x50.*30x50"):
        sample_rain_patches(exemplar, small_mask, 8, 0.5, 5, derive_rng(0, 0))
    with pytest.raises(ExtractionError, match="threshold"):
        sample_rain_patches(
            exemplar, RainMask(np.zeros((40, 50), dtype=bool)), 8, 0.5, 5, derive_rng(0, 0)
        )
    with pytest.raises(ValueError):
        sample_rain_patches(exemplar, mask, 8, 0.5, 0, derive_rng(0, 0))
