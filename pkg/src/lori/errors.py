"""Exception types shared across the package.

Every error raised by a public operation is a subclass of ``LoriError``,
so callers (CLI, service) can distinguish validation failures from
genuine bugs.
"""

from __future__ import annotations


class LoriError(Exception):
    """Base class for all package-level errors."""


# corpus ----------------------------------------------------------------

class MissingFile(LoriError):
    pass


class SchemaViolation(LoriError):
    """A record file broke the line-record schema.

    Carries enough context to locate the offending line.
    """

    def __init__(self, file: str, line: int, field: str, message: str):
        super().__init__(f"{file}:{line}: field {field!r}: {message}")
        self.file = file
        self.line = line
        self.field = field


class DanglingReference(LoriError):
    pass


class EmptyCorpus(LoriError):
    pass


class BadFractions(LoriError):
    pass


# textprep --------------------------------------------------------------

class EmptyInput(LoriError):
    pass


# lingfeat --------------------------------------------------------------

class TaggerUnavailable(LoriError):
    pass


class RegistryMismatch(LoriError):
    pass


class EmptyMatrix(LoriError):
    pass


# classify --------------------------------------------------------------

class SingleClassTrainingSet(LoriError):
    pass


class BackendUnavailable(LoriError):
    pass


class SizeExceedsDataset(LoriError):
    pass


# evalmetrics -----------------------------------------------------------

class LengthMismatch(LoriError):
    pass


class NonBinaryLabel(LoriError):
    pass


class NoPositives(LoriError):
    pass


# extract ---------------------------------------------------------------

class ConstraintViolation(LoriError):
    """Generated text broke the output grammar it was constrained to."""


class ToolMissing(LoriError):
    pass


# pipeline --------------------------------------------------------------

class ExtractionFailure(LoriError):
    pass


class EmptyDocument(LoriError):
    pass


class BoundaryMismatch(LoriError):
    pass


class EmptyLetter(LoriError):
    pass


class StageError(LoriError):
    """Wraps a failure with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause
