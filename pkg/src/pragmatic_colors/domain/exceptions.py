"""Domain exceptions for pragmatic-colors.

Provides a comprehensive error hierarchy for the library and CLI.
All exceptions inherit from PragmaticColorsError for consistent handling;
each class carries the process exit code the CLI reports for it.
"""

from typing import Optional


class PragmaticColorsError(Exception):
    """Base exception for all pragmatic-colors errors.

    Attributes:
        message: Human-readable error description
        code: Machine-readable error code (e.g., 'DATA_FORMAT')
        exit_code: Process exit code used by the CLI
    """

    exit_code: int = 1

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        if self.code:
            return f"[{self.code}] {self.message}"
        return self.message


# ============================================================================
# Configuration Errors
# ============================================================================


class ConfigurationError(PragmaticColorsError):
    """Raised when settings or a config file fail validation."""

    def __init__(self, message: str):
        super().__init__(message, code="CONFIG_INVALID")


# ============================================================================
# Validation Errors (bad user input, exit code 1)
# ============================================================================


class ValidationError(PragmaticColorsError):
    """Base class for input validation errors."""

    pass


class InvalidModifierError(ValidationError):
    """Raised when a modifier is empty or has more than two tokens."""

    def __init__(self, modifier: str):
        super().__init__(
            f"Modifier must have 1 or 2 tokens, got {modifier!r}",
            code="INVALID_MODIFIER",
        )
        self.modifier = modifier


class EmptyGridError(ValidationError):
    """Raised when a lambda grid search is requested over no values."""

    def __init__(self, message: str = "Lambda grid is empty"):
        super().__init__(message, code="EMPTY_GRID")


class InvalidColorError(ValidationError):
    """Raised when a color string cannot be parsed."""

    def __init__(self, text: str):
        super().__init__(f"Cannot parse color {text!r}", code="INVALID_COLOR")
        self.text = text


# ============================================================================
# Data Errors (input files and corpora, exit code 2)
# ============================================================================


class DataError(PragmaticColorsError):
    """Base class for dataset, embedding and artifact errors."""

    exit_code = 2


class DataFormatError(DataError):
    """Raised when a CSV file contains a malformed row.

    Attributes:
        line_number: 1-based line number of the offending row
    """

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, code="DATA_FORMAT")
        self.line_number = line_number


class EmbeddingFormatError(DataError):
    """Raised when a word-vector file line has the wrong shape."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}", code="EMBEDDING_FORMAT")
        self.line_number = line_number


class OutOfVocabularyError(DataError):
    """Raised in strict mode when a modifier token has no embedding."""

    def __init__(self, token: str):
        super().__init__(f"Token {token!r} has no embedding", code="OOV_TOKEN")
        self.token = token


class InsufficientSamplesError(DataError):
    """Raised when a label has too few vectors for the requested partitions."""

    def __init__(self, label: str, available: int, required: int):
        super().__init__(
            f"Label {label!r} has {available} vectors, {required} required",
            code="INSUFFICIENT_SAMPLES",
        )
        self.label = label
        self.available = available
        self.required = required


class EmptyPartitionError(DataError):
    """Raised when sampling from a partition with no vectors."""

    def __init__(self, label: str, partition: str):
        super().__init__(
            f"Label {label!r} has no vectors in partition {partition!r}",
            code="EMPTY_PARTITION",
        )
        self.label = label
        self.partition = partition


class UnknownLabelError(DataError):
    """Raised when a color label has no samples."""

    def __init__(self, label: str):
        super().__init__(f"Unknown color label {label!r}", code="UNKNOWN_LABEL")
        self.label = label


class ArtifactError(DataError):
    """Raised when a model artifact or manifest cannot be read or verified."""

    def __init__(self, message: str):
        super().__init__(message, code="ARTIFACT_INVALID")


class ShapeMismatchError(DataError):
    """Raised when array shapes do not match a network's input width."""

    def __init__(self, message: str, expected: int, actual: int):
        super().__init__(
            f"{message}: expected {expected}, got {actual}", code="SHAPE_MISMATCH"
        )
        self.expected = expected
        self.actual = actual


# ============================================================================
# Numerical Errors (exit code 3)
# ============================================================================


class NumericalError(PragmaticColorsError):
    """Base class for numerical failures."""

    exit_code = 3


class NonFiniteLossError(NumericalError):
    """Raised when the training loss becomes NaN or infinite.

    Attributes:
        epoch: 1-based epoch in which the loss diverged
        batch: 0-based batch index within that epoch
    """

    def __init__(self, epoch: int, batch: int, value: float):
        super().__init__(
            f"Non-finite loss {value!r} at epoch {epoch}, batch {batch}",
            code="NON_FINITE_LOSS",
        )
        self.epoch = epoch
        self.batch = batch
        self.value = value


# ============================================================================
# Experiment Errors
# ============================================================================


class ExperimentRunError(PragmaticColorsError):
    """Raised when one seeded run of an experiment fails.

    The exit code is inherited from a domain cause; any other cause is
    treated as invalid input (exit code 1).
    """

    def __init__(self, seed: int, cause: Exception):
        super().__init__(f"Run with seed {seed} failed: {cause}", code="RUN_FAILED")
        self.seed = seed
        self.cause = cause
        self.exit_code = cause.exit_code if isinstance(cause, PragmaticColorsError) else 1
