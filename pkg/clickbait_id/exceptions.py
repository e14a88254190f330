from typing import Optional


class ClickbaitError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ClickbaitError, ValueError):
    """Invalid run configuration; ``field`` names the offending config field."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class DataError(ClickbaitError, ValueError):
    """Input data (datasets, vocab files, parameter files) could not be used."""


class ParamsFormatError(DataError):
    """A serialized model file is malformed, truncated or incompatible."""


class EncoderError(ClickbaitError, RuntimeError):
    """The encoder model could not be opened or produced unusable output."""


class PipelineError(ClickbaitError, RuntimeError):
    """A classifier pipeline failed while processing one cross-validation fold."""

    def __init__(self, message: str, fold_index: Optional[int] = None):
        super().__init__(message)
        self.fold_index = fold_index
