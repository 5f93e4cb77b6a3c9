"""Exception hierarchy.

Every error carries a short ``code`` (e.g. ``"duplicate-id"``) that the CLI
prints in its diagnostics.
"""
from __future__ import annotations


class BistreamError(Exception):
    code = "error"


class InvalidDimension(BistreamError, ValueError):
    code = "invalid-dimension"


class ShapeError(BistreamError, ValueError):
    code = "shape-error"


class NotBistochastic(BistreamError, ValueError):
    code = "not-bistochastic"


class InvalidTransform(BistreamError, ValueError):
    code = "invalid-transform"


class MatrixIndexError(BistreamError, IndexError):
    code = "index-error"


class InvalidLambda(BistreamError, ValueError):
    code = "invalid-lambda"


class InvalidRange(BistreamError, ValueError):
    code = "invalid-range"


class InsufficientSeed(BistreamError, ValueError):
    code = "insufficient-seed"


class DuplicateId(BistreamError, ValueError):
    code = "duplicate-id"


class InvalidValue(BistreamError, ValueError):
    code = "invalid-value"


class UnknownCategory(BistreamError, ValueError):
    code = "unknown-category"


class AlreadyKnown(BistreamError, ValueError):
    code = "already-known"


class SchemaError(BistreamError, ValueError):
    code = "schema-error"


class EmptyInput(BistreamError, ValueError):
    code = "empty-input"


class ParseError(BistreamError, ValueError):
    code = "parse-error"

    def __init__(self, message: str, lineno: int | None = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class InvalidTarget(BistreamError, ValueError):
    code = "invalid-target"


class ConfigError(BistreamError, ValueError):
    code = "config-error"


class AuditInputError(BistreamError):
    code = "audit-input-error"


class MalformedLog(BistreamError, ValueError):
    code = "malformed-log"
