# errors.py
"""Exception hierarchy shared by every module.

Pure operators raise these; the objective boundary (trainer.evaluate_config)
and the worker pool turn them into failed EvaluationRecords instead.
"""


class MushroomError(Exception):
    """Base class for all domain errors."""


class IdxFormatError(MushroomError):
    """Bad magic number or malformed IDX header."""


class IdxLengthError(MushroomError):
    """IDX payload shorter (or longer) than its header claims."""


class DatasetError(MushroomError):
    """Missing dataset files, label/image mismatch, bad subsample request."""


class ChecksumError(DatasetError):
    def __init__(self, filename: str, expected: str, actual: str, algorithm: str = "sha256"):
        self.filename = filename
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"checksum mismatch for {filename}: expected {algorithm} {expected}, got {actual}"
        )


class ShapeError(MushroomError):
    """Array dimensions do not line up."""


class NumericError(MushroomError):
    """Non-finite weights or activities."""


class ConfigError(MushroomError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n  " + "\n  ".join(problems))


class UnfitModelError(MushroomError):
    """Surrogate queried before (or without) a successful fit."""


class LogFormatError(MushroomError):
    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        super().__init__(f"malformed log line {line_number}: {reason}")


class ReportError(MushroomError):
    """Nothing to report on (empty log or no successful evaluation)."""
