"""Exception hierarchy shared across the package."""


class ContractViolation(ValueError):
    """An operation was called with arguments that break its preconditions."""


class DegenerateRegionError(ValueError):
    """Feature statistics were requested for a region too small or too flat to support them."""


class WeightFormatError(ValueError):
    """Base class for weight-container problems."""


class BadMagicError(WeightFormatError):
    """The file does not start with the container magic bytes."""


class VersionMismatchError(WeightFormatError):
    """The container declares a format version this loader does not understand."""


class TruncatedPayloadError(WeightFormatError):
    """The container ends before its declared contents do."""


class ChecksumError(WeightFormatError):
    """The trailing CRC32 does not match the container body."""


class MissingTensorError(WeightFormatError):
    """A tensor required by the model plan is absent from the store."""


class TensorShapeError(WeightFormatError):
    """A stored tensor has a shape incompatible with the model plan."""


class PipelineError(RuntimeError):
    """User-facing failure in the image pipeline (unreadable file, bad segmentation, ...)."""
