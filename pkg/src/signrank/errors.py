"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """A precondition on an argument was violated."""


class ParseError(ValueError):
    """Malformed edge-list text. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SizeLimitError(InvalidArgument):
    """Input exceeds the cap of an exact (exponential-time) search."""


class TrainingDiverged(RuntimeError):
    """Loss became non-finite. Carries the last finite parameters and the record so far."""

    def __init__(self, message, params=None, record=None, epoch=None):
        super().__init__(message)
        self.params = params
        self.record = record
        self.epoch = epoch
