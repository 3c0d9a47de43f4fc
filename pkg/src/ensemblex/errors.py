"""Exception types raised across the package."""


class EnsembleError(Exception):
    """Base class for all errors raised by ensemblex."""


class InvalidInputError(EnsembleError, ValueError):
    """Input violates a precondition (non-finite, empty, out of range)."""


class DimensionMismatchError(EnsembleError, ValueError):
    """Shapes of two inputs that must agree do not."""


class UnsupportedScaleError(EnsembleError, ValueError):
    """A combination scale was requested that the data cannot support."""


class ManifestError(EnsembleError, ValueError):
    """Base class for score-file and manifest format problems."""


class MissingFileError(ManifestError):
    """A file referenced by a manifest does not exist."""


class RaggedRowError(ManifestError):
    """A CSV file has rows of unequal length."""


class ClassCountMismatchError(ManifestError):
    """A score file's column count disagrees with the declared class count."""


class NonFiniteValueError(ManifestError):
    """A loaded file contains NaN or infinite values."""


class NormalizationError(ManifestError):
    """A probability row does not sum to one."""


class FormatVersionError(ManifestError):
    """A file declares an unknown format version."""


class LearnerNameMismatchError(ManifestError):
    """Model and manifest disagree on learner names or order."""
