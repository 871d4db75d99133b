"""Exception and warning types shared across the package."""


class CurveFieldError(Exception):
    """Base class for all package-specific errors."""


class GridMismatchError(CurveFieldError):
    """Two gridded inputs do not live on the same voxel grid."""


class EmptyMaskError(CurveFieldError):
    """A masked reduction selected zero voxels.

    Raised instead of silently returning 0 so that configuration errors
    (e.g. a curve lying entirely outside the patch) surface immediately.
    """


class NoCurveDetectedError(CurveFieldError):
    """The inference pipeline produced fewer than two candidate points."""


class PowerIterationError(CurveFieldError):
    """The 1-D embedding eigeniteration did not converge within its cap."""


class CorruptVolumeError(CurveFieldError):
    """Volume payload inconsistent with its sidecar header."""


class UnsupportedFormatError(CurveFieldError):
    """Volume header declares a dtype or layout this reader does not support."""


class DisconnectedGraphWarning(UserWarning):
    """The neighbor graph fell apart into components and was bridged."""
