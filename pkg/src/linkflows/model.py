"""Domain types for the review graph and the structural checks over them.

Articles are networks of immutable snippet nodes; review comments are typed
links into that network carrying four mandatory classification dimensions
(aspect, polarity, action needed, impact).  Responses and action checks hang
off comments via `is_response_to`, version lineage via `previous_version`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Optional, Protocol, Union
from urllib.parse import urlsplit

from .errors import CycleDetectedError, ModelViolationError, UnknownIdError, Violation

# IRIs are plain strings; validation lives in check_iri / iri_violations.
Iri = str


class Role(str, Enum):
    REVIEWER = "reviewer"
    AUTHOR = "author"
    EDITOR = "editor"
    PEER = "peer"
    MODEL_EXPERT = "modelExpert"
    TOOL = "tool"


class GranularityLevel(str, Enum):
    ARTICLE = "article"
    SECTION = "section"
    # Figures, tables, sentences, footnotes, listings etc. all map to
    # paragraph level, optionally tagged via SnippetNode.subtype.
    PARAGRAPH = "paragraph"


class Aspect(str, Enum):
    SYNTAX = "syntax"
    STYLE = "style"
    CONTENT = "content"


class Polarity(str, Enum):
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    POSITIVE = "positive"

    @property
    def ordinal(self) -> float:
        """Normalized position on [0, 1]: negative 0, neutral 0.5, positive 1."""
        return {"negative": 0.0, "neutral": 0.5, "positive": 1.0}[self.value]


class ActionNeeded(str, Enum):
    ACTION_NEEDED = "actionNeeded"
    SUGGESTION = "suggestion"
    NO_ACTION_NEEDED = "noActionNeeded"


class Agreement(str, Enum):
    AGREE = "agree"
    PARTIALLY_AGREE = "partiallyAgree"
    DISAGREE = "disagree"


class CheckStatus(str, Enum):
    ADDRESSED = "addressed"
    PARTIALLY_ADDRESSED = "partiallyAddressed"
    NOT_ADDRESSED = "notAddressed"


@dataclass(frozen=True)
class ImpactScore:
    """Reviewer-assigned integer 1..5; `normalized` maps it onto [0, 1]."""

    value: int

    @property
    def normalized(self) -> float:
        return (self.value - 1) / 4

    def violations(self) -> list[Violation]:
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            return [Violation("impact-not-integer", f"impact must be an integer, got {self.value!r}")]
        if not 1 <= self.value <= 5:
            return [Violation("impact-out-of-range", f"impact must be in [1, 5], got {self.value}")]
        return []


@dataclass(frozen=True)
class Agent:
    id: Iri
    display_name: str
    role: Role


@dataclass(frozen=True)
class SnippetNode:
    """An immutable, IRI-addressed piece of an article.

    Edits never mutate a node; they mint a new one linked back through
    `previous_version`.
    """

    id: Iri
    level: GranularityLevel
    text: str
    parent: Optional[Iri] = None
    order: int = 0
    previous_version: Optional[Iri] = None
    created_at: Optional[datetime] = None
    subtype: Optional[str] = None  # free-text tag for paragraph-level variants


@dataclass(frozen=True)
class ReviewComment:
    """A classified comment targeting a snippet node.

    All four classification dimensions are mandatory: the whole point of the
    model is that intent is captured when the comment is written, so partially
    classified comments are rejected rather than defaulted.
    """

    id: Iri
    refers_to: Iri
    text: str
    author: Iri
    aspect: Aspect
    polarity: Polarity
    action_needed: ActionNeeded
    impact: ImpactScore
    previous_version: Optional[Iri] = None
    created_at: Optional[datetime] = None


@dataclass(frozen=True)
class ResponseComment:
    """Author's reply to a comment, classified by agreement level."""

    id: Iri
    is_response_to: Iri
    author: Iri
    text: str
    agreement: Agreement
    created_at: Optional[datetime] = None


@dataclass(frozen=True)
class ActionCheckComment:
    """Reviewer's or editor's verdict on whether a raised point got addressed."""

    id: Iri
    is_response_to: Iri
    author: Iri
    text: str
    status: CheckStatus
    created_at: Optional[datetime] = None


Record = Union[Agent, SnippetNode, ReviewComment, ResponseComment, ActionCheckComment]
CommentRecord = Union[ReviewComment, ResponseComment, ActionCheckComment]

_WHITESPACE_RE = re.compile(r"\s")


def check_iri(value: str) -> bool:
    """True iff `value` is an absolute IRI (scheme + authority + path), no whitespace."""
    if not value or _WHITESPACE_RE.search(value):
        return False
    try:
        parts = urlsplit(value)
    except ValueError:
        return False
    return bool(parts.scheme) and bool(parts.netloc)


def iri_violations(value: str, field: str) -> list[Violation]:
    if not check_iri(value):
        return [Violation("invalid-iri", f"{field} is not an absolute IRI: {value!r}")]
    return []


def utc_now() -> datetime:
    """Current UTC time at second resolution (the model's timestamp grain)."""
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).replace(microsecond=0).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(text: str) -> datetime:
    try:
        return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise ModelViolationError(f"bad timestamp {text!r}: {exc}") from None


class StoreView(Protocol):
    """Read access to a consistent snapshot of stored records."""

    def get_record(self, iri: Iri) -> Optional[Record]: ...

    def iter_records(self) -> Iterable[Record]: ...


class ExistenceResolver(Protocol):
    def exists(self, iri: Iri) -> bool: ...


class _ViewResolver:
    def __init__(self, view: StoreView):
        self._view = view

    def exists(self, iri: Iri) -> bool:
        return self._view.get_record(iri) is not None


def resolver_from_view(view: StoreView) -> ExistenceResolver:
    return _ViewResolver(view)


def validate_comment(comment: ReviewComment, resolver: ExistenceResolver) -> list[Violation]:
    """Check every structural constraint on a review comment.

    Returns the empty list when the comment is valid; otherwise one entry per
    violation, each with a machine-readable code.  Never raises: violations
    are data, not failures.
    """
    out: list[Violation] = []
    out += iri_violations(comment.id, "id")
    out += iri_violations(comment.refers_to, "refersTo")
    out += iri_violations(comment.author, "author")
    if not comment.text:
        out.append(Violation("empty-text", "comment text must be non-empty"))
    for name, value, enum_type in (
        ("aspect", comment.aspect, Aspect),
        ("polarity", comment.polarity, Polarity),
        ("actionNeeded", comment.action_needed, ActionNeeded),
    ):
        if value is None:
            out.append(Violation(f"missing-{name}", f"{name} classification is required"))
        elif not isinstance(value, enum_type):
            out.append(Violation(f"bad-{name}", f"{name} has unknown category {value!r}"))
    if comment.impact is None:
        out.append(Violation("missing-impact", "impact score is required"))
    else:
        out += comment.impact.violations()
    if comment.previous_version is not None:
        out += iri_violations(comment.previous_version, "previousVersion")
    if check_iri(comment.refers_to) and not resolver.exists(comment.refers_to):
        out.append(Violation("dangling-target", f"refersTo does not resolve: {comment.refers_to}"))
    return out


def validate_snippet(node: SnippetNode, resolver: ExistenceResolver) -> list[Violation]:
    """Structural checks for snippet nodes, including the parent-level rules."""
    out: list[Violation] = []
    out += iri_violations(node.id, "id")
    if not isinstance(node.level, GranularityLevel):
        out.append(Violation("bad-level", f"unknown granularity level {node.level!r}"))
        return out
    if node.level is GranularityLevel.ARTICLE and node.parent is not None:
        out.append(Violation("article-has-parent", "article-level nodes have no parent"))
    if node.parent is not None:
        out += iri_violations(node.parent, "parent")
        parent = None
        if check_iri(node.parent):
            parent = getattr(resolver, "get_record", lambda _: None)(node.parent)
            if parent is None and not resolver.exists(node.parent):
                out.append(Violation("dangling-parent", f"parent does not resolve: {node.parent}"))
        if isinstance(parent, SnippetNode):
            allowed = {
                GranularityLevel.SECTION: {GranularityLevel.ARTICLE},
                GranularityLevel.PARAGRAPH: {GranularityLevel.SECTION, GranularityLevel.ARTICLE},
            }.get(node.level, set())
            if parent.level not in allowed:
                out.append(
                    Violation(
                        "bad-parent-level",
                        f"{node.level.value} node cannot be parented to a {parent.level.value} node",
                    )
                )
    elif node.level is not GranularityLevel.ARTICLE:
        # Sections/paragraphs must sit somewhere in an article tree.
        out.append(Violation("missing-parent", f"{node.level.value} node needs a parent"))
    if node.order < 0:
        out.append(Violation("negative-order", "order must be non-negative"))
    if node.previous_version is not None:
        out += iri_violations(node.previous_version, "previousVersion")
        prev = getattr(resolver, "get_record", lambda _: None)(node.previous_version)
        if isinstance(prev, SnippetNode) and prev.level is not node.level:
            out.append(
                Violation(
                    "version-level-mismatch",
                    f"previousVersion is a {prev.level.value} node, expected {node.level.value}",
                )
            )
    return out


def validate_response(comment: ResponseComment, resolver: ExistenceResolver) -> list[Violation]:
    out: list[Violation] = []
    out += iri_violations(comment.id, "id")
    out += iri_violations(comment.is_response_to, "isResponseTo")
    out += iri_violations(comment.author, "author")
    if not isinstance(comment.agreement, Agreement):
        out.append(Violation("bad-agreement", f"unknown agreement value {comment.agreement!r}"))
    if check_iri(comment.is_response_to) and not resolver.exists(comment.is_response_to):
        out.append(Violation("dangling-parent", f"isResponseTo does not resolve: {comment.is_response_to}"))
    return out


def validate_check(comment: ActionCheckComment, resolver: ExistenceResolver) -> list[Violation]:
    out: list[Violation] = []
    out += iri_violations(comment.id, "id")
    out += iri_violations(comment.is_response_to, "isResponseTo")
    out += iri_violations(comment.author, "author")
    if not isinstance(comment.status, CheckStatus):
        out.append(Violation("bad-status", f"unknown check status {comment.status!r}"))
    if check_iri(comment.is_response_to) and not resolver.exists(comment.is_response_to):
        out.append(Violation("dangling-parent", f"isResponseTo does not resolve: {comment.is_response_to}"))
    return out


def validate_agent(agent: Agent) -> list[Violation]:
    out = iri_violations(agent.id, "id")
    if not agent.display_name:
        out.append(Violation("empty-display-name", "agent display name must be non-empty"))
    if not isinstance(agent.role, Role):
        out.append(Violation("bad-role", f"unknown role {agent.role!r}"))
    return out


def validate_record(record: Record, resolver: ExistenceResolver) -> list[Violation]:
    if isinstance(record, ReviewComment):
        return validate_comment(record, resolver)
    if isinstance(record, SnippetNode):
        return validate_snippet(record, resolver)
    if isinstance(record, ResponseComment):
        return validate_response(record, resolver)
    if isinstance(record, ActionCheckComment):
        return validate_check(record, resolver)
    if isinstance(record, Agent):
        return validate_agent(record)
    return [Violation("unknown-record", f"unsupported record type {type(record).__name__}")]


@dataclass
class ThreadNode:
    """One comment in a reply tree, children ordered by (created_at, id)."""

    record: CommentRecord
    children: list["ThreadNode"]

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children)

    def depth(self) -> int:
        return 1 + max((child.depth() for child in self.children), default=0)


def _sort_key(record: CommentRecord):
    # Timestamp ties are broken by IRI so thread rendering is deterministic.
    ts = record.created_at or datetime.min.replace(tzinfo=timezone.utc)
    return (ts, record.id)


def thread_of(comment_id: Iri, view: StoreView) -> ThreadNode:
    """Full reply tree rooted at the review comment that contains `comment_id`.

    The id may name the root itself or any response/check transitively below
    it; the same tree comes back either way.
    """
    record = view.get_record(comment_id)
    if record is None:
        raise UnknownIdError(f"no such comment: {comment_id}")
    if not isinstance(record, (ReviewComment, ResponseComment, ActionCheckComment)):
        raise UnknownIdError(f"{comment_id} is not a comment")

    seen = {record.id}
    while isinstance(record, (ResponseComment, ActionCheckComment)):
        parent = view.get_record(record.is_response_to)
        if parent is None or not isinstance(parent, (ReviewComment, ResponseComment, ActionCheckComment)):
            raise UnknownIdError(f"broken reply chain at {record.is_response_to}")
        if parent.id in seen:
            raise CycleDetectedError(f"isResponseTo cycle through {parent.id}")
        seen.add(parent.id)
        record = parent

    children_of: dict[Iri, list[CommentRecord]] = {}
    for rec in view.iter_records():
        if isinstance(rec, (ResponseComment, ActionCheckComment)):
            children_of.setdefault(rec.is_response_to, []).append(rec)

    def build(rec: CommentRecord, path: frozenset[Iri]) -> ThreadNode:
        if rec.id in path:
            raise CycleDetectedError(f"isResponseTo cycle through {rec.id}")
        kids = sorted(children_of.get(rec.id, []), key=_sort_key)
        return ThreadNode(rec, [build(k, path | {rec.id}) for k in kids])

    return build(record, frozenset())


def version_history(node_id: Iri, view: StoreView) -> list[Record]:
    """All versions of a node, newest first, by following previous_version links."""
    record = view.get_record(node_id)
    if record is None:
        raise UnknownIdError(f"no such node: {node_id}")
    chain = [record]
    seen = {record.id}
    while True:
        prev_id = getattr(chain[-1], "previous_version", None)
        if prev_id is None:
            return chain
        if prev_id in seen:
            raise CycleDetectedError(f"isUpdateOf cycle through {prev_id}")
        prev = view.get_record(prev_id)
        if prev is None:
            raise UnknownIdError(f"previousVersion does not resolve: {prev_id}")
        chain.append(prev)
        seen.add(prev_id)
