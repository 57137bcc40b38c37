"""Exception types shared across the package.

File-level I/O failures (missing, unreadable, truncated files) are reported
as plain OSError; everything the toolkit itself diagnoses uses the classes
below so the CLI can map failure classes to one-line messages.
"""


class RainweaveError(Exception):
    """Base class for toolkit-diagnosed failures."""


class FormatError(RainweaveError):
    """A file decoded fine but is not an 8-bit grayscale/RGB PNG."""


class DimensionError(RainweaveError):
    """Shapes that must agree do not, or an input is too small."""


class BoundsError(RainweaveError):
    """A patch reference sticks out of its image; message carries coordinates."""


class ExtractionError(RainweaveError):
    """Rain patch sampling cannot proceed (no valid positions, empty bank)."""
