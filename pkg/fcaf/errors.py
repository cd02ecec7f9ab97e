"""Exception hierarchy shared by the library, the CLI and the tool server."""
from typing import Any, Optional


class FcafError(Exception):
    """Base class for every error raised by fcaf."""


class DomainError(FcafError, ValueError):
    """An evaluation point lies outside the individual space [0, 1]."""


class ArgumentError(FcafError, ValueError):
    """Invalid arguments, representations or infeasible generator parameters."""


class ProtocolError(FcafError):
    """A black-box aggregator answered a probe with an invalid result.

    Args:
        message: Human readable description
        probe: The offending probe (usually a Profile) for diagnostics
    """

    def __init__(self, message: str, probe: Optional[Any] = None):
        super().__init__(message)
        self.probe = probe


class PreconditionError(FcafError):
    """A harness precondition does not hold for the given aggregator."""

    def __init__(self, message: str, diagnostic: Optional[Any] = None):
        super().__init__(message)
        self.diagnostic = diagnostic
