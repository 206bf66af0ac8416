"""Error types shared across the pipeline.

Every error raised on purpose by this package derives from SizeGridError so
callers can catch the whole family at a stage boundary without swallowing
genuine bugs (TypeError, KeyError and friends stay untouched).
"""


class SizeGridError(Exception):
    pass


class MalformedSeason(SizeGridError, ValueError):
    """Season code is not a 3-digit code ending in 1 or 3."""


class EmptyAfterNormalize(SizeGridError, ValueError):
    """Size token contained nothing but separators and blanks."""


class MalformedGridName(SizeGridError, ValueError):
    """Grid name does not decompose into gender/category/descriptive/extension."""


class InvalidConfig(SizeGridError, ValueError):
    """Configuration value out of range or inconsistent."""


class SchemaMismatch(SizeGridError, ValueError):
    """Table or matrix does not carry the columns an operation needs."""


class IoFailure(SizeGridError, OSError):
    """File could not be read or written."""


class SelectionOutsideGrid(SizeGridError, ValueError):
    """Selection history references a cell absent from the candidate grid."""


class EmptyPartition(SizeGridError, ValueError):
    """A season split left train, validation or test empty."""


class UnknownColumn(SizeGridError, KeyError):
    """Encoder asked to transform a column it was never fitted on."""


class TooFewMinority(SizeGridError, ValueError):
    """Oversampling needs more minority rows than the data provides."""


class DegenerateTarget(SizeGridError, ValueError):
    """Target column has a single level where two are required."""


class LengthMismatch(SizeGridError, ValueError):
    """Paired vectors differ in length."""


class OneClassOnly(SizeGridError, ValueError):
    """Metric needs both classes present in the truth vector."""


class MissingPrice(SizeGridError, KeyError):
    """No unit price available for a grid name during impact costing."""


class NotFound(SizeGridError, KeyError):
    """Requested grid decision does not exist in the run."""


class CapViolation(SizeGridError, ValueError):
    """An override or cap change would push selections past the cap."""


class CapBelowOverrides(SizeGridError, ValueError):
    """A what-if cap is smaller than the number of pinned selections."""


class ServiceValidationError(SizeGridError, ValueError):
    """Request payload failed semantic validation."""


class StageFailed(SizeGridError, RuntimeError):
    """A pipeline stage raised; the original error rides along as the cause."""
