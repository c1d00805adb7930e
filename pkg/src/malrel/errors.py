"""Exception hierarchy shared by all malrel modules."""

from __future__ import annotations


class MalrelError(Exception):
    """Base class for every error raised by malrel."""


class ParseError(MalrelError, ValueError):
    """Malformed input text. ``location`` says where the problem is."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class CapExceeded(MalrelError):
    """A configured size cap was hit.

    ``reached`` is the size at which the computation stopped (or the size
    that would have been required, when that is known up front).
    """

    def __init__(self, what: str, cap: int, reached: int):
        self.what = what
        self.cap = cap
        self.reached = reached
        super().__init__(f"{what}: cap {cap} exceeded (reached {reached})")


class CarrierMismatch(MalrelError, ValueError):
    pass


class NotAdmissible(MalrelError, ValueError):
    pass


class UnboundName(MalrelError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unbound name"
