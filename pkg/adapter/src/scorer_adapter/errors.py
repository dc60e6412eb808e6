"""Adapter error types.

Endpoint failures are retriable and carry the question id so a rerun can
resume; schema problems in the input dataset are fatal immediately.
"""


class AdapterError(Exception):
    pass


class DatasetSchemaError(AdapterError):
    """The input dataset row is malformed. Fatal."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class RetriableScoringError(AdapterError):
    """A model call kept failing. Safe to retry the run."""

    def __init__(self, question_id: str, message: str):
        self.question_id = question_id
        super().__init__(f"question {question_id!r}: {message}")


class ValidationFailure(AdapterError):
    """The primary refused the produced score file."""
