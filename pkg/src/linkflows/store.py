"""Append-only, content-addressed store for the review graph.

Every node gets an IRI minted from the SHA-256 digest of its canonical
payload bytes, so identical content always lands on the identical IRI and
re-submission dedupes instead of duplicating.  Persistence is a single
directory: `manifest.json` plus `nodes.jsonl` (one envelope per line); the
in-memory index is rebuilt on open and each line's hash is verified then.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from . import model
from .errors import (
    CollisionError,
    IntegrityError,
    NotFoundError,
    ReferenceUnresolvedError,
    ValidationFailedError,
    Violation,
)
from .model import (
    ActionCheckComment,
    Agent,
    GranularityLevel,
    ImpactScore,
    Iri,
    Record,
    ReviewComment,
    ResponseComment,
    SnippetNode,
)

SCHEMA_VERSION = "1"
DEFAULT_BASE = "https://linkflows.example/"

MANIFEST_FILE = "manifest.json"
LOG_FILE = "nodes.jsonl"


class NodeKind(str, Enum):
    SNIPPET = "snippet"
    REVIEW_COMMENT = "reviewComment"
    RESPONSE_COMMENT = "responseComment"
    ACTION_CHECK_COMMENT = "actionCheckComment"
    AGENT = "agent"


# IRI path segment per kind: base + segment + "/" + 16-hex digest prefix.
KIND_SEGMENT = {
    NodeKind.SNIPPET: "snippets",
    NodeKind.REVIEW_COMMENT: "comments",
    NodeKind.RESPONSE_COMMENT: "responses",
    NodeKind.ACTION_CHECK_COMMENT: "checks",
    NodeKind.AGENT: "agents",
}
SEGMENT_KIND = {seg: kind for kind, seg in KIND_SEGMENT.items()}


@dataclass(frozen=True)
class StoreManifest:
    base_namespace: Iri
    node_count: int
    created_at: datetime
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "baseNamespace": self.base_namespace,
            "nodeCount": self.node_count,
            "createdAt": model.format_timestamp(self.created_at),
            "schemaVersion": self.schema_version,
        }


@dataclass(frozen=True)
class NodeEnvelope:
    """A stored node: kind, wire payload, and the full content digest.

    `id` embeds the first 16 hex chars of `content_hash`; the hash covers the
    canonical payload bytes, which exclude timestamps so that resubmitted
    identical content dedupes.
    """

    id: Iri
    kind: NodeKind
    payload: dict
    content_hash: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "payload": self.payload,
            "contentHash": self.content_hash,
        }

    def record(self) -> Record:
        return record_from_payload(self.id, self.kind, self.payload)


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def canonical_payload_bytes(payload: dict) -> bytes:
    """Key-sorted, newline-delimited `key=value` UTF-8 encoding of a payload.

    `createdAt` and absent (None) fields are skipped; backslash, LF and CR in
    values are backslash-escaped.  This byte string is what gets hashed, so
    the encoding is part of the on-disk contract and must stay stable.
    """
    lines = []
    for key in sorted(payload):
        if key in ("createdAt", "id"):
            continue
        value = payload[key]
        if value is None:
            continue
        if isinstance(value, bool):
            raise ValueError(f"boolean payload field not supported: {key}")
        lines.append(f"{key}={_escape(str(value))}\n")
    return "".join(lines).encode("utf-8")


def content_hash(payload: dict) -> str:
    return hashlib.sha256(canonical_payload_bytes(payload)).hexdigest()


def mint_iri(kind: NodeKind, payload_bytes: bytes, base_namespace: Iri) -> Iri:
    """Deterministic IRI: base + kind segment + "/" + first 16 hex of SHA-256."""
    digest = hashlib.sha256(payload_bytes).hexdigest()
    return f"{base_namespace}{KIND_SEGMENT[kind]}/{digest[:16]}"


def make_envelope(kind: NodeKind, payload: dict, base_namespace: Iri) -> NodeEnvelope:
    data = canonical_payload_bytes(payload)
    digest = hashlib.sha256(data).hexdigest()
    iri = f"{base_namespace}{KIND_SEGMENT[kind]}/{digest[:16]}"
    return NodeEnvelope(id=iri, kind=kind, payload=dict(payload), content_hash=digest)


def _opt(payload: dict, key: str) -> Optional[str]:
    value = payload.get(key)
    return value if value is not None else None


def _created(payload: dict) -> Optional[datetime]:
    raw = payload.get("createdAt")
    return model.parse_timestamp(raw) if raw else None


def record_from_payload(iri: Iri, kind: NodeKind, payload: dict) -> Record:
    """Decode a wire payload into its typed record.

    Unknown enum tokens raise ModelViolationError via the enum constructors;
    callers at parse boundaries turn that into a violation report.
    """
    try:
        if kind is NodeKind.SNIPPET:
            return SnippetNode(
                id=iri,
                level=GranularityLevel(payload["level"]),
                text=payload.get("text", ""),
                parent=_opt(payload, "parent"),
                order=int(payload.get("order", 0)),
                previous_version=_opt(payload, "previousVersion"),
                created_at=_created(payload),
                subtype=_opt(payload, "subtype"),
            )
        if kind is NodeKind.REVIEW_COMMENT:
            return ReviewComment(
                id=iri,
                refers_to=payload["refersTo"],
                text=payload.get("text", ""),
                author=payload["author"],
                aspect=model.Aspect(payload["aspect"]),
                polarity=model.Polarity(payload["polarity"]),
                action_needed=model.ActionNeeded(payload["actionNeeded"]),
                impact=ImpactScore(int(payload["impact"])),
                previous_version=_opt(payload, "previousVersion"),
                created_at=_created(payload),
            )
        if kind is NodeKind.RESPONSE_COMMENT:
            return ResponseComment(
                id=iri,
                is_response_to=payload["isResponseTo"],
                author=payload["author"],
                text=payload.get("text", ""),
                agreement=model.Agreement(payload["agreement"]),
                created_at=_created(payload),
            )
        if kind is NodeKind.ACTION_CHECK_COMMENT:
            return ActionCheckComment(
                id=iri,
                is_response_to=payload["isResponseTo"],
                author=payload["author"],
                text=payload.get("text", ""),
                status=model.CheckStatus(payload["status"]),
                created_at=_created(payload),
            )
        if kind is NodeKind.AGENT:
            return Agent(
                id=iri,
                display_name=payload["displayName"],
                role=model.Role(payload["role"]),
            )
    except (KeyError, ValueError) as exc:
        raise model.ModelViolationError(f"bad {kind.value} payload: {exc}") from None
    raise model.ModelViolationError(f"unknown node kind {kind!r}")


def payload_from_record(record: Record) -> tuple[NodeKind, dict]:
    """Encode a typed record as (kind, wire payload)."""
    if isinstance(record, SnippetNode):
        payload = {
            "level": record.level.value,
            "text": record.text,
            "parent": record.parent,
            "order": record.order,
            "previousVersion": record.previous_version,
            "subtype": record.subtype,
        }
        kind = NodeKind.SNIPPET
    elif isinstance(record, ReviewComment):
        payload = {
            "refersTo": record.refers_to,
            "text": record.text,
            "author": record.author,
            "aspect": record.aspect.value,
            "polarity": record.polarity.value,
            "actionNeeded": record.action_needed.value,
            "impact": record.impact.value,
            "previousVersion": record.previous_version,
        }
        kind = NodeKind.REVIEW_COMMENT
    elif isinstance(record, ResponseComment):
        payload = {
            "isResponseTo": record.is_response_to,
            "author": record.author,
            "text": record.text,
            "agreement": record.agreement.value,
        }
        kind = NodeKind.RESPONSE_COMMENT
    elif isinstance(record, ActionCheckComment):
        payload = {
            "isResponseTo": record.is_response_to,
            "author": record.author,
            "text": record.text,
            "status": record.status.value,
        }
        kind = NodeKind.ACTION_CHECK_COMMENT
    elif isinstance(record, Agent):
        payload = {"displayName": record.display_name, "role": record.role.value}
        kind = NodeKind.AGENT
    else:
        raise model.ModelViolationError(f"unsupported record type {type(record).__name__}")
    created = getattr(record, "created_at", None)
    if created is not None:
        payload["createdAt"] = model.format_timestamp(created)
    return kind, {k: v for k, v in payload.items() if v is not None}


class GraphStore:
    """Single-writer / multi-reader store over one directory.

    Writes are serialized by an internal lock; reads only touch immutable
    envelopes so they are safe without coordination.
    """

    def __init__(self, path: Path | str, base_namespace: str = DEFAULT_BASE, create: bool = True):
        self.path = Path(path)
        self._lock = threading.RLock()
        self._by_id: dict[Iri, NodeEnvelope] = {}
        self._order: list[Iri] = []
        manifest_path = self.path / MANIFEST_FILE
        if manifest_path.exists():
            self._load()
        elif create:
            if not base_namespace.endswith("/"):
                raise ValueError("base namespace must end with '/'")
            self.path.mkdir(parents=True, exist_ok=True)
            self.manifest = StoreManifest(base_namespace, 0, model.utc_now())
            self._write_manifest()
            (self.path / LOG_FILE).touch()
        else:
            raise NotFoundError(f"no store at {self.path}")

    # -- persistence ----------------------------------------------------

    def _load(self) -> None:
        raw = json.loads((self.path / MANIFEST_FILE).read_text(encoding="utf-8"))
        self.manifest = StoreManifest(
            base_namespace=raw["baseNamespace"],
            node_count=int(raw["nodeCount"]),
            created_at=model.parse_timestamp(raw["createdAt"]),
            schema_version=raw.get("schemaVersion", SCHEMA_VERSION),
        )
        log_path = self.path / LOG_FILE
        if not log_path.exists():
            raise IntegrityError(f"missing {LOG_FILE} in {self.path}")
        for lineno, line in enumerate(log_path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IntegrityError(f"{LOG_FILE}:{lineno}: corrupt envelope: {exc}") from None
            envelope = NodeEnvelope(
                id=entry["id"],
                kind=NodeKind(entry["kind"]),
                payload=entry["payload"],
                content_hash=entry["contentHash"],
            )
            recomputed = content_hash(envelope.payload)
            if recomputed != envelope.content_hash or not envelope.id.endswith("/" + recomputed[:16]):
                raise IntegrityError(
                    f"{LOG_FILE}:{lineno}: content hash mismatch for {envelope.id}"
                )
            self._by_id[envelope.id] = envelope
            self._order.append(envelope.id)
        if len(self._by_id) != self.manifest.node_count:
            raise IntegrityError(
                f"manifest says {self.manifest.node_count} nodes, log holds {len(self._by_id)}"
            )

    def _write_manifest(self) -> None:
        tmp = self.path / (MANIFEST_FILE + ".tmp")
        tmp.write_text(json.dumps(self.manifest.to_dict(), indent=2) + "\n", encoding="utf-8")
        tmp.replace(self.path / MANIFEST_FILE)

    def _append_log(self, envelopes: Sequence[NodeEnvelope]) -> None:
        with open(self.path / LOG_FILE, "a", encoding="utf-8") as fh:
            for env in envelopes:
                fh.write(json.dumps(env.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")

    # -- core operations -------------------------------------------------

    @property
    def base_namespace(self) -> str:
        return self.manifest.base_namespace

    def __len__(self) -> int:
        return len(self._by_id)

    def exists(self, iri: Iri) -> bool:
        return iri in self._by_id

    def get_node(self, iri: Iri) -> NodeEnvelope:
        env = self._by_id.get(iri)
        if env is None:
            raise NotFoundError(f"no node {iri}")
        return env

    def get_record(self, iri: Iri) -> Optional[Record]:
        env = self._by_id.get(iri)
        return env.record() if env else None

    def iter_envelopes(self) -> Iterator[NodeEnvelope]:
        for iri in self._order:
            yield self._by_id[iri]

    def iter_records(self) -> Iterator[Record]:
        for env in self.iter_envelopes():
            yield env.record()

    def put_node(self, envelope: NodeEnvelope) -> Iri:
        return self.put_batch([envelope])[0]

    def put_batch(self, envelopes: Sequence[NodeEnvelope]) -> list[Iri]:
        """Validate and persist a batch atomically; returns the stored IRIs.

        References may resolve against already-stored nodes or earlier
        members of the same batch.  Nothing is written unless every envelope
        passes validation.
        """
        with self._lock:

            class _BatchResolver:
                def __init__(self, store: GraphStore, pending: dict[Iri, Record]):
                    self._store = store
                    self._pending = pending

                def exists(self, iri: Iri) -> bool:
                    return iri in self._pending or self._store.exists(iri)

                def get_record(self, iri: Iri) -> Optional[Record]:
                    if iri in self._pending:
                        return self._pending[iri]
                    return self._store.get_record(iri)

            pending: dict[Iri, Record] = {}
            fresh: list[NodeEnvelope] = []
            results: list[Iri] = []
            resolver = _BatchResolver(self, pending)
            for env in envelopes:
                expected = content_hash(env.payload)
                if expected != env.content_hash:
                    raise ValidationFailedError(
                        [Violation("hash-mismatch", f"envelope hash does not match payload for {env.id}")]
                    )
                if not env.id.startswith(self.base_namespace):
                    raise ValidationFailedError(
                        [Violation("foreign-namespace", f"{env.id} is outside {self.base_namespace}")]
                    )
                existing = self._by_id.get(env.id)
                if existing is not None:
                    if existing.content_hash != env.content_hash:
                        raise CollisionError(
                            f"distinct content competing for {env.id}; refusing to overwrite"
                        )
                    results.append(env.id)  # idempotent re-put
                    continue
                if env.id in pending:
                    results.append(env.id)  # duplicate within batch
                    continue
                record = env.record()
                violations = model.validate_record(record, resolver)
                dangling = [v for v in violations if v.code in ("dangling-target", "dangling-parent")]
                if dangling:
                    raise ReferenceUnresolvedError(
                        "; ".join(v.detail for v in dangling)
                    )
                if violations:
                    raise ValidationFailedError(violations)
                for ref in _references(record):
                    if not resolver.exists(ref):
                        raise ReferenceUnresolvedError(f"{env.id} references missing node {ref}")
                pending[env.id] = record
                fresh.append(env)
                results.append(env.id)

            if fresh:
                self._append_log(fresh)
                for env in fresh:
                    self._by_id[env.id] = env
                    self._order.append(env.id)
                self.manifest = StoreManifest(
                    self.manifest.base_namespace,
                    len(self._by_id),
                    self.manifest.created_at,
                    self.manifest.schema_version,
                )
                self._write_manifest()
            return results

    def add_record(self, record: Record) -> Iri:
        """Convenience: envelope a typed record (id field ignored) and store it."""
        kind, payload = payload_from_record(record)
        return self.put_node(make_envelope(kind, payload, self.base_namespace))

    def query(
        self,
        kind: Optional[NodeKind] = None,
        target: Optional[Iri] = None,
        author: Optional[Iri] = None,
        level: Optional[GranularityLevel] = None,
        aspect: Optional[model.Aspect] = None,
        polarity: Optional[model.Polarity] = None,
        action_needed: Optional[model.ActionNeeded] = None,
        impact: Optional[int] = None,
        agreement: Optional[model.Agreement] = None,
        status: Optional[model.CheckStatus] = None,
    ) -> list[NodeEnvelope]:
        """All nodes matching every supplied criterion, ordered by (createdAt, IRI).

        `target` matches a comment's link target: refersTo for review
        comments, isResponseTo for responses and checks.
        """
        out = []
        for env in self.iter_envelopes():
            p = env.payload
            if kind is not None and env.kind is not kind:
                continue
            if target is not None and p.get("refersTo") != target and p.get("isResponseTo") != target:
                continue
            if author is not None and p.get("author") != author:
                continue
            if level is not None and p.get("level") != level.value:
                continue
            if aspect is not None and p.get("aspect") != aspect.value:
                continue
            if polarity is not None and p.get("polarity") != polarity.value:
                continue
            if action_needed is not None and p.get("actionNeeded") != action_needed.value:
                continue
            if impact is not None and p.get("impact") != impact:
                continue
            if agreement is not None and p.get("agreement") != agreement.value:
                continue
            if status is not None and p.get("status") != status.value:
                continue
            out.append(env)
        out.sort(key=lambda env: (env.payload.get("createdAt", ""), env.id))
        return out


def _references(record: Record) -> Iterable[Iri]:
    """Outbound IRIs that must resolve before the record may be stored."""
    if isinstance(record, SnippetNode):
        refs = [record.parent, record.previous_version]
    elif isinstance(record, ReviewComment):
        refs = [record.refers_to, record.author, record.previous_version]
    elif isinstance(record, (ResponseComment, ActionCheckComment)):
        refs = [record.is_response_to, record.author]
    else:
        refs = []
    return [r for r in refs if r is not None]


def stores_isomorphic(a: GraphStore, b: GraphStore) -> bool:
    """Content-addressed stores are isomorphic iff their node sets coincide."""
    ids_a = {env.id: env.content_hash for env in a.iter_envelopes()}
    ids_b = {env.id: env.content_hash for env in b.iter_envelopes()}
    return ids_a == ids_b
