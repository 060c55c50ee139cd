"""Exception hierarchy shared by all patchblend modules."""


class PatchBlendError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(PatchBlendError):
    """Two buffers that must share dimensions do not."""


class FormatError(PatchBlendError):
    """An image file is malformed or in an unsupported format."""


class SequenceGapError(PatchBlendError):
    """A frame index is missing from an otherwise contiguous sequence."""


class EmptyAccumulatorError(PatchBlendError):
    """Attempted to finalize an accumulator holding zero frames."""


class ConfigError(PatchBlendError):
    """A configuration value is out of its documented range."""


class UntrackableError(PatchBlendError):
    """A keypoint track has no confident samples to smooth."""
