"""Linkflows: a semantic review-graph engine.

Articles become networks of addressable snippet nodes, review comments are
typed links into that network, and the analytics suite measures how well
different groups of readers agree about them.
"""

from .errors import (
    AnalyticsError,
    CollisionError,
    CycleDetectedError,
    EmptyInputError,
    IntegrityError,
    KTooLargeError,
    LinkflowsError,
    ModelViolationError,
    NotFoundError,
    ParseError,
    ProblemReport,
    ReferenceUnresolvedError,
    UnknownIdError,
    ValidationFailedError,
    Violation,
)
from .model import (
    ActionCheckComment,
    ActionNeeded,
    Agent,
    Agreement,
    Aspect,
    CheckStatus,
    GranularityLevel,
    ImpactScore,
    Polarity,
    ResponseComment,
    ReviewComment,
    Role,
    SnippetNode,
    thread_of,
    validate_comment,
    version_history,
)
from .store import GraphStore, NodeEnvelope, NodeKind, StoreManifest, mint_iri

__all__ = [
    "ActionCheckComment",
    "ActionNeeded",
    "Agent",
    "Agreement",
    "AnalyticsError",
    "Aspect",
    "CheckStatus",
    "CollisionError",
    "CycleDetectedError",
    "EmptyInputError",
    "GranularityLevel",
    "GraphStore",
    "ImpactScore",
    "IntegrityError",
    "KTooLargeError",
    "LinkflowsError",
    "ModelViolationError",
    "NodeEnvelope",
    "NodeKind",
    "NotFoundError",
    "ParseError",
    "Polarity",
    "ProblemReport",
    "ReferenceUnresolvedError",
    "ResponseComment",
    "ReviewComment",
    "Role",
    "SnippetNode",
    "StoreManifest",
    "UnknownIdError",
    "ValidationFailedError",
    "Violation",
    "mint_iri",
    "thread_of",
    "validate_comment",
    "version_history",
]

__version__ = "0.1.0"
