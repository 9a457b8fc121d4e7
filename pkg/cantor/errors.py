"""
Structured errors raised by cantor operations.

Every error carries a machine-readable ``code`` and a ``details`` mapping so
that the CLI can report the cause without parsing messages.
"""

from typing import Any, Dict


class CantorError(Exception):
    """Base class for domain errors (CLI exit code 1)."""

    code = "cantor_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> dict:
        return {
            "success": False,
            "error": {
                "code": self.code,
                "message": self.message,
                "details": {k: _plain(v) for k, v in sorted(self.details.items())},
            },
        }


def _plain(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


class LevelCapExceeded(CantorError):
    code = "level_cap_exceeded"


class InvalidDigit(CantorError):
    code = "invalid_digit"


class InvalidIndex(CantorError):
    code = "invalid_index"


class IndexMismatch(CantorError):
    code = "index_mismatch"


class DepthExceeded(CantorError):
    code = "depth_exceeded"


class NotFixed(CantorError):
    code = "not_fixed"


class InvalidElement(CantorError):
    code = "invalid_element"


class InvalidParameters(CantorError):
    code = "invalid_parameters"


class SearchExhausted(CantorError):
    code = "search_exhausted"
