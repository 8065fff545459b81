"""Shared exception types and the machine-readable problem shape."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Violation:
    """One structural-constraint violation, as data rather than a failure."""

    code: str
    detail: str

    def to_dict(self) -> dict:
        return {"code": self.code, "detail": self.detail}


class LinkflowsError(Exception):
    """Base for all errors raised by this package."""

    code = "error"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UnknownIdError(LinkflowsError):
    code = "unknown-id"


class CycleDetectedError(LinkflowsError):
    """A link chain that must be acyclic loops back on itself (corrupt store)."""

    code = "cycle-detected"


class ValidationFailedError(LinkflowsError):
    code = "validation-failed"

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        detail = "; ".join(f"{v.code}: {v.detail}" for v in self.violations)
        super().__init__(detail or "validation failed")


class ReferenceUnresolvedError(LinkflowsError):
    code = "reference-unresolved"


class NotFoundError(LinkflowsError):
    code = "not-found"


class IntegrityError(LinkflowsError):
    """Persisted bytes disagree with their recorded content hash."""

    code = "integrity-error"


class CollisionError(LinkflowsError):
    """Two distinct payloads minted the same 64-bit IRI suffix."""

    code = "iri-collision"


class ParseError(LinkflowsError):
    code = "parse-error"

    def __init__(self, detail: str, line: int, column: int):
        super().__init__(f"{detail} (line {line}, column {column})")
        self.line = line
        self.column = column


class ModelViolationError(LinkflowsError):
    code = "model-violation"


class EmptyInputError(LinkflowsError):
    code = "empty-input"


class KTooLargeError(LinkflowsError):
    code = "k-too-large"


class AnalyticsError(LinkflowsError):
    """Metric precondition unmet (empty overlap, degenerate input, ...)."""

    code = "analytics-error"

    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code


@dataclass
class ProblemReport:
    """Error rendering shared by the HTTP API and the CLI."""

    status: int
    code: str
    detail: str
    violations: list[Violation] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"status": self.status, "code": self.code, "detail": self.detail}
        if self.violations:
            out["violations"] = [v.to_dict() for v in self.violations]
        return out
