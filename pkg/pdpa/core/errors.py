"""
Exception hierarchy for the simulator.

Every error carries the process exit code the command line reports for it,
much like an HTTP handler attaches a status code to a failure.
"""
from typing import Optional


class PDPAError(Exception):
    """Base class for every failure the simulator reports on purpose."""

    exit_code: int = 2

    def __init__(self, message: str, *, key: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.key = key

    def __str__(self) -> str:
        if self.key:
            return f"{self.key}: {self.message}"
        return self.message


class ConfigError(PDPAError):
    """Invalid flag, config key, value range or scheme."""

    exit_code = 1


class ParameterError(ConfigError, ValueError):
    """A numeric parameter outside its admissible range (e.g. Fermi noise K <= 0)."""


class AlphaRangeError(ParameterError):
    """Abstention level index outside [0, 2*kappa]."""


class SimulationError(PDPAError):
    """Runtime failure while simulating; replicate failures name their seed."""

    exit_code = 2

    def __init__(self, message: str, *, seed: Optional[int] = None, key: Optional[str] = None):
        super().__init__(message, key=key)
        self.seed = seed

    def __str__(self) -> str:
        base = super().__str__()
        if self.seed is not None:
            return f"{base} (seed={self.seed})"
        return base


class OutputError(PDPAError):
    """I/O failure while writing or reading a bundle file."""

    exit_code = 2

    def __init__(self, message: str, *, path: str):
        super().__init__(f"{message} [{path}]")
        self.path = path


class SelftestFailure(PDPAError):
    """At least one oracle check failed."""

    exit_code = 3
