"""Exception types shared across the package.

Machine-readable ``code`` strings form a closed set; the HTTP layer maps
them onto status codes and the CLI onto exit codes.
"""

from __future__ import annotations


class OpsaiError(Exception):
    code = "internal"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ParseError(OpsaiError):
    """Malformed input bytes; ``offset`` is the byte offset of the failure."""

    code = "parse_error"

    def __init__(self, detail: str, offset: int | None = None):
        super().__init__(detail)
        self.offset = offset


class ValidationError(OpsaiError):
    """A domain invariant does not hold; names the offending field or seq."""

    code = "validation"

    def __init__(self, detail: str, field: str | None = None, seq: int | None = None):
        super().__init__(detail)
        self.field = field
        self.seq = seq


class NotFoundError(OpsaiError):
    code = "not_found"


class ConflictError(OpsaiError):
    """State conflict (seq gap, finalized session, duplicate object, ...)."""

    code = "conflict"

    def __init__(self, detail: str, code: str | None = None):
        super().__init__(detail)
        if code is not None:
            self.code = code


class IntegrityError(OpsaiError):
    """Stored data fails verification (segment gap, replay hash mismatch)."""

    code = "integrity"

    def __init__(self, detail: str, seq: int | None = None):
        super().__init__(detail)
        self.seq = seq


class StorageError(OpsaiError):
    code = "storage"
