"""Platform error taxonomy.

Every user-visible failure carries a stable string code; the API layer maps
codes to HTTP statuses and clients map them back to typed exceptions.
"""

from __future__ import annotations


class PlatformError(Exception):
    code = "INTERNAL"

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class AuthFailed(PlatformError):
    code = "AUTH_FAILED"


class SchemaViolationError(PlatformError):
    code = "SCHEMA_VIOLATION"


class InvalidJob(PlatformError):
    code = "INVALID_JOB"


class UnknownBackend(PlatformError):
    code = "UNKNOWN_BACKEND"


class UnknownJob(PlatformError):
    code = "UNKNOWN_JOB"


class UnknownWorker(PlatformError):
    code = "UNKNOWN_WORKER"


class UnknownSession(PlatformError):
    code = "UNKNOWN_SESSION"


class CapabilityMissing(PlatformError):
    code = "CAPABILITY_MISSING"


class UserLimitExceeded(PlatformError):
    code = "USER_LIMIT_EXCEEDED"


class ReservationConflict(PlatformError):
    code = "CONFLICT"


class ResultsNotReady(PlatformError):
    code = "NOT_READY"


class JobFailedError(PlatformError):
    code = "JOB_FAILED"


class JobCancelledError(PlatformError):
    code = "JOB_CANCELLED"


class NoCapableBackend(PlatformError):
    code = "NO_CAPABLE_BACKEND"


class IllegalTransition(PlatformError):
    code = "ILLEGAL_TRANSITION"
