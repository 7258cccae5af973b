"""Exception types shared across the package."""

from __future__ import annotations


class StgNavError(Exception):
    """Base class for all package errors."""


class ParseError(StgNavError):
    """A document does not conform to the capture format."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class VersionError(StgNavError):
    """Document version is not supported."""


class ParameterError(StgNavError):
    """An operation parameter is out of its allowed range."""


class ConflictError(StgNavError):
    """Two graphs disagree on the payload of a shared state id."""

    def __init__(self, state_ids: list[str]):
        super().__init__(f"conflicting state payloads: {', '.join(sorted(state_ids))}")
        self.state_ids = sorted(state_ids)


class CapacityError(StgNavError):
    """Instance exceeds the exact solver's size bound."""


class UnknownStateError(StgNavError):
    """An observed state is not present in the session graph."""


class InternalConsistencyError(StgNavError):
    """Predecessor matrix and graph disagree; indicates a bug upstream."""
