"""Exception types raised by the engine.

Everything inherits from DittoError so callers can catch the whole family;
most types also subclass ValueError to keep stdlib semantics.
"""


class DittoError(Exception):
    """Base class for all engine errors."""


class ShapeError(DittoError, ValueError):
    """Operand shapes are incompatible. The message names both shapes."""


class DegenerateInputError(DittoError, ValueError):
    """Input is degenerate for the requested operation (zero vector, empty sum)."""


class VocabError(DittoError, ValueError):
    """Vocabulary file is malformed or missing required special tokens."""


class WeightsError(DittoError, ValueError):
    """Checkpoint is incomplete or a tensor has the wrong shape."""


class FormatError(DittoError, ValueError):
    """A binary/text container could not be parsed. Carries a byte offset when known."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SequenceTooLongError(DittoError, ValueError):
    """Token sequence exceeds the model's position table."""


class PoolingSpecError(DittoError, ValueError):
    """PoolingSpec is missing a field required by its strategy, or is unparsable."""


class UndefinedCorrelationError(DittoError, ValueError):
    """Correlation is undefined (constant input)."""


class InsufficientDataError(DittoError, ValueError):
    """Fewer data points than the statistic requires."""


class DataFormatError(DittoError, ValueError):
    """A dataset file failed validation. Carries file/line context in the message."""
