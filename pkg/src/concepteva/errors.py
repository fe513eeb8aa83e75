"""Shared exception types.

Argument/precondition violations raise plain ``ValueError``; everything
that crosses a file or wire boundary gets a typed exception so callers
can map it to an HTTP status or exit code.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine-raised errors."""


class DocumentParseError(EngineError):
    """Malformed document interchange payload; message names the offending field."""


class GazetteerLoadError(EngineError):
    """Malformed or ambiguous gazetteer file; message names the line or surface form."""


class BackendError(EngineError):
    """Structured model-backend failure.

    ``code`` is one of ``unreachable``, ``timeout``, ``capacity``,
    ``malformed``. ``unreachable`` and ``timeout`` are retryable for
    idempotent calls; the others are not.
    """

    RETRYABLE_CODES = frozenset({"unreachable", "timeout"})

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message

    @property
    def retryable(self) -> bool:
        return self.code in self.RETRYABLE_CODES


class CapacityError(BackendError):
    """Input exceeds the backend's token capacity."""

    def __init__(self, message: str):
        super().__init__("capacity", message)


class ProtocolError(BackendError):
    """Backend response violates the wire contract (dims, norms, budgets)."""

    def __init__(self, message: str):
        super().__init__("malformed", message)


class PersistenceError(EngineError):
    """Session or document could not be written to disk."""


class SessionLoadError(PersistenceError):
    """Persisted session file is unreadable or corrupt; message names the session."""
