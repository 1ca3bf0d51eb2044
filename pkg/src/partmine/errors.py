"""Exception types raised across the package.

Every error inherits from :class:`PartMineError` so callers can catch the
whole family with one clause.  File-format errors carry the byte offset at
which parsing failed.
"""


class PartMineError(Exception):
    """Base class for all partmine errors."""


# --- tensor file I/O -------------------------------------------------------

class MalformedHeader(PartMineError):
    """Tensor file header is structurally invalid."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedElementType(PartMineError):
    """Tensor file declares an element type we do not handle."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class TruncatedPayload(PartMineError):
    """Tensor file ends before the declared payload is complete."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class IoFailure(PartMineError):
    """Reading or writing a file failed at the OS level."""


# --- numeric primitives ----------------------------------------------------

class ZeroExtent(PartMineError):
    """A requested output dimension is smaller than 1."""


class ZeroVector(PartMineError):
    """Cannot normalize a vector whose norm is (numerically) zero."""


class ShapeMismatch(PartMineError):
    """Operand shapes are incompatible."""


# --- transactions ----------------------------------------------------------

class AllZeroStack(PartMineError):
    """A feature stack contains no strictly positive activation."""


# --- mining ----------------------------------------------------------------

class ItemOutOfRange(PartMineError):
    """An item index falls outside the transaction universe."""


class InvalidBeta(PartMineError):
    """Minimum support threshold outside (0, 1]."""


class UniverseTooLarge(PartMineError):
    """Exhaustive mining refused: the item universe exceeds the guard."""


# --- part localization -----------------------------------------------------

class EmptyMap(PartMineError):
    """A support map has no positive cell."""


class TooFewPoints(PartMineError):
    """Fewer data points than requested clusters."""


class EmptyMask(PartMineError):
    """A binary mask selects no pixel."""


# --- part alignment --------------------------------------------------------

class NotSymmetric(PartMineError):
    """Matrix handed to the symmetric eigensolver is not symmetric."""


class NoConvergence(PartMineError):
    """Eigendecomposition failed to converge."""


class TooFewRows(PartMineError):
    """Fewer descriptor rows than requested groups."""


class DegenerateAffinity(PartMineError):
    """A row of the affinity graph has zero degree."""


# --- classification --------------------------------------------------------

class LengthMismatch(PartMineError):
    """Vector lengths disagree."""


class SingleClass(PartMineError):
    """Training data contains fewer than two distinct labels."""


class EmptyTraining(PartMineError):
    """Training set is empty."""


# --- pipeline --------------------------------------------------------------

class ConfigError(PartMineError):
    """Pipeline configuration is invalid or references missing inputs."""
