"""Exception hierarchy shared across the package.

Each class carries the process exit code the CLI maps it to.
"""


class DapinnError(Exception):
    exit_code = 1


class ConfigError(DapinnError):
    """Invalid configuration: bad key, bad value, impossible geometry."""

    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UsageError(DapinnError, ValueError):
    """API misuse: shape mismatch, unknown names, foreign recording nodes."""

    exit_code = 2


class NumericOverflowError(DapinnError, FloatingPointError):
    exit_code = 3

    def __init__(self, op, detail=""):
        self.op = op
        msg = f"non-finite value produced by '{op}'"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DivergenceError(DapinnError):
    exit_code = 3

    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")


class ReferenceUnavailable(DapinnError):
    """A reference-solution oracle failed to converge."""


class UndefinedMetricError(DapinnError, ValueError):
    pass


class OutputError(DapinnError):
    exit_code = 4
