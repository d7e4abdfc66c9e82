"""Exception hierarchy shared by all modules.

Every exception carries the process exit code the command-line front end
should use when it escapes a subcommand.
"""


class SifiRankError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 3


class ConfigError(SifiRankError, ValueError):
    """Invalid parameters or configuration file content."""

    exit_code = 1


class DataError(SifiRankError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class NumericalError(SifiRankError, ArithmeticError):
    """A computation produced non-finite values or could not proceed."""


class EstimationError(SifiRankError, ValueError):
    """A statistic is undefined for the supplied sample."""


class UnreachableSinkError(NumericalError):
    """Some nodes cannot reach the absorbing node of a Markov chain."""

    def __init__(self, sink, unreachable):
        self.sink = sink
        self.unreachable = list(unreachable)
        super().__init__(
            f"sink {sink} is unreachable from nodes {self.unreachable}")
