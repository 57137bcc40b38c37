"""rainweave: transfer rain structure from real rain photos onto clean images.

The pipeline extracts zero-mean residual patches from the rainy regions of an
exemplar image, then quilts them over a target in raster order, cutting each
overlap along its minimum-error seam so that neighboring rain patches join
without visible block edges. A pair mode emits aligned (clean, rain) patch
pairs without any seam blending, for training de-raining models.
"""

from .errors import (
    BoundsError,
    DimensionError,
    ExtractionError,
    FormatError,
    RainweaveError,
)
from .extraction import (
    PatchBank,
    ResidualPatch,
    enumerate_valid_positions,
    patch_coverage,
    residual_of,
    sample_rain_patches,
)
from .imagecore import (
    ImageBuffer,
    PatchRef,
    RainMask,
    check_bounds,
    get_patch,
    load_image,
    load_mask,
    save_image,
)
from .quilting import (
    SeamPath,
    blend,
    min_cut_horizontal,
    min_cut_vertical,
    overlap_error_surface,
    seam_to_mask,
)
from .synthesis import (
    PairRecord,
    TransferConfig,
    compose_patch,
    default_overlap,
    derive_rng,
    generate_pairs,
    plan_grid,
    transfer,
)

__version__ = "0.1.0"

__all__ = [
    "BoundsError",
    "DimensionError",
    "ExtractionError",
    "FormatError",
    "ImageBuffer",
    "PairRecord",
    "PatchBank",
    "PatchRef",
    "RainMask",
    "RainweaveError",
    "ResidualPatch",
    "SeamPath",
    "TransferConfig",
    "blend",
    "check_bounds",
    "compose_patch",
    "default_overlap",
    "derive_rng",
    "enumerate_valid_positions",
    "generate_pairs",
    "get_patch",
    "load_image",
    "load_mask",
    "min_cut_horizontal",
    "min_cut_vertical",
    "overlap_error_surface",
    "patch_coverage",
    "plan_grid",
    "residual_of",
    "sample_rain_patches",
    "save_image",
    "seam_to_mask",
    "transfer",
    "__version__",
]
