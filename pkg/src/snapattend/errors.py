"""Exception hierarchy shared by every layer.

The HTTP apps map these onto status codes (see backend_app.ERROR_STATUS);
the pure modules raise them directly.
"""


class SnapAttendError(Exception):
    """Base class; carries a short machine-readable code."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InvalidInputError(SnapAttendError):
    code = "invalid-input"


class InvalidSessionError(InvalidInputError):
    code = "invalid-session"


class InvalidConfigError(InvalidInputError):
    code = "invalid-config"


class InconsistentPresenceError(InvalidInputError):
    code = "inconsistent-presence"


class InconsistentInputError(InvalidInputError):
    code = "inconsistent-input"


class NotFoundError(SnapAttendError):
    code = "not-found"


class ConflictError(SnapAttendError):
    code = "conflict"


class ForbiddenError(SnapAttendError):
    code = "forbidden"


class UnauthorizedError(SnapAttendError):
    code = "unauthorized"


class ScenarioParseError(InvalidInputError):
    code = "scenario-parse"


class ScenarioValidationError(InvalidInputError):
    code = "scenario-invalid"


class ConnectionLostError(SnapAttendError):
    code = "connection-lost"


class OutOfWindowError(InvalidInputError):
    code = "out-of-window"
