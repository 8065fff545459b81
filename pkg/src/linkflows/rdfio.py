"""Turtle serialization of the review graph under the Linkflows vocabulary.

Review comments are typed with one class per classification dimension
(multi-typing mirrors the vocabulary's subclass design); structural facts
about snippets and agents that the comment vocabulary cannot carry (level,
containment, position, role) live in a separate documented structure
namespace so that import(export(store)) loses nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional

from . import model, store as storemod
from .errors import ModelViolationError
from .store import NodeEnvelope, NodeKind, make_envelope
from .turtle import RDF_TYPE, XSD, Literal, Term, Triple, parse, serialize

VOCAB_NS = "https://linkflows.example/vocab#"
STRUCT_NS = "https://linkflows.example/structure#"
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
DCTERMS_NS = "http://purl.org/dc/terms/"

RDFS_LABEL = RDFS_NS + "label"
RDFS_SUBCLASS = RDFS_NS + "subClassOf"
RDFS_RANGE = RDFS_NS + "range"
DCT_CREATED = DCTERMS_NS + "created"

BASE_PREFIXES = {
    "rdf": RDF_NS,
    "rdfs": RDFS_NS,
    "dcterms": DCTERMS_NS,
    "xsd": XSD,
    "lf": VOCAB_NS,
    "lfs": STRUCT_NS,
}


class TermKind(str, Enum):
    CLASS = "class"
    OBJECT_PROPERTY = "objectProperty"
    DATATYPE_PROPERTY = "datatypeProperty"


@dataclass(frozen=True)
class VocabularyTerm:
    local_name: str
    term_kind: TermKind
    superclass: Optional[str] = None  # local name; "Comment" for the top-level comment kinds


_C = TermKind.CLASS
VOCABULARY: tuple[VocabularyTerm, ...] = (
    VocabularyTerm("ReviewComment", _C, "Comment"),
    VocabularyTerm("SyntaxComment", _C, "ReviewComment"),
    VocabularyTerm("StyleComment", _C, "ReviewComment"),
    VocabularyTerm("ContentComment", _C, "ReviewComment"),
    VocabularyTerm("PositiveComment", _C, "ReviewComment"),
    VocabularyTerm("NeutralComment", _C, "ReviewComment"),
    VocabularyTerm("NegativeComment", _C, "ReviewComment"),
    VocabularyTerm("ActionNeededComment", _C, "ReviewComment"),
    VocabularyTerm("SuggestionComment", _C, "ReviewComment"),
    VocabularyTerm("NoActionNeededComment", _C, "ReviewComment"),
    VocabularyTerm("ResponseComment", _C, "Comment"),
    VocabularyTerm("AgreementComment", _C, "ResponseComment"),
    VocabularyTerm("PartialAgreementComment", _C, "ResponseComment"),
    VocabularyTerm("DisagreementComment", _C, "ResponseComment"),
    VocabularyTerm("ActionCheckComment", _C, "Comment"),
    VocabularyTerm("PointAddressedComment", _C, "ActionCheckComment"),
    VocabularyTerm("PointPartiallyAddressedComment", _C, "ActionCheckComment"),
    VocabularyTerm("PointNotAddressedComment", _C, "ActionCheckComment"),
    VocabularyTerm("refersTo", TermKind.OBJECT_PROPERTY),
    VocabularyTerm("isResponseTo", TermKind.OBJECT_PROPERTY),
    VocabularyTerm("isUpdateOf", TermKind.OBJECT_PROPERTY),
    VocabularyTerm("hasCommentAuthor", TermKind.OBJECT_PROPERTY),
    VocabularyTerm("hasCommentText", TermKind.DATATYPE_PROPERTY),
    VocabularyTerm("hasImpact", TermKind.DATATYPE_PROPERTY),  # the only integer-ranged one
)

ASPECT_CLASS = {
    model.Aspect.SYNTAX: "SyntaxComment",
    model.Aspect.STYLE: "StyleComment",
    model.Aspect.CONTENT: "ContentComment",
}
POLARITY_CLASS = {
    model.Polarity.POSITIVE: "PositiveComment",
    model.Polarity.NEUTRAL: "NeutralComment",
    model.Polarity.NEGATIVE: "NegativeComment",
}
ACTION_CLASS = {
    model.ActionNeeded.ACTION_NEEDED: "ActionNeededComment",
    model.ActionNeeded.SUGGESTION: "SuggestionComment",
    model.ActionNeeded.NO_ACTION_NEEDED: "NoActionNeededComment",
}
AGREEMENT_CLASS = {
    model.Agreement.AGREE: "AgreementComment",
    model.Agreement.PARTIALLY_AGREE: "PartialAgreementComment",
    model.Agreement.DISAGREE: "DisagreementComment",
}
STATUS_CLASS = {
    model.CheckStatus.ADDRESSED: "PointAddressedComment",
    model.CheckStatus.PARTIALLY_ADDRESSED: "PointPartiallyAddressedComment",
    model.CheckStatus.NOT_ADDRESSED: "PointNotAddressedComment",
}
LEVEL_CLASS = {
    model.GranularityLevel.ARTICLE: "Article",
    model.GranularityLevel.SECTION: "Section",
    model.GranularityLevel.PARAGRAPH: "Paragraph",
}

_CLASS_ASPECT = {v: k for k, v in ASPECT_CLASS.items()}
_CLASS_POLARITY = {v: k for k, v in POLARITY_CLASS.items()}
_CLASS_ACTION = {v: k for k, v in ACTION_CLASS.items()}
_CLASS_AGREEMENT = {v: k for k, v in AGREEMENT_CLASS.items()}
_CLASS_STATUS = {v: k for k, v in STATUS_CLASS.items()}
_CLASS_LEVEL = {v: k for k, v in LEVEL_CLASS.items()}

# Structure namespace: the part of the graph the comment vocabulary cannot
# express but lossless round-trips need.
STRUCT_CLASSES = {"Article", "Section", "Paragraph", "Agent"}
STRUCT_PART_OF = STRUCT_NS + "partOf"
STRUCT_POSITION = STRUCT_NS + "position"
STRUCT_TYPE_TAG = STRUCT_NS + "structureType"
STRUCT_ROLE = STRUCT_NS + "role"
STRUCT_TEXT = STRUCT_NS + "text"

ALLOWED_PREDICATES = (
    {VOCAB_NS + t.local_name for t in VOCABULARY if t.term_kind is not TermKind.CLASS}
    | {RDF_TYPE, RDFS_LABEL, DCT_CREATED}
    | {STRUCT_PART_OF, STRUCT_POSITION, STRUCT_TYPE_TAG, STRUCT_ROLE, STRUCT_TEXT}
)


def _integer(value: int) -> Literal:
    return Literal(str(value), datatype=XSD + "integer")


def _datetime(ts) -> Literal:
    return Literal(model.format_timestamp(ts), datatype=XSD + "dateTime")


def triples_for_record(record: model.Record) -> list[Triple]:
    """The exact triple footprint of one stored record."""
    lf = VOCAB_NS
    out: list[Triple] = []
    if isinstance(record, model.Agent):
        out.append((record.id, RDF_TYPE, STRUCT_NS + "Agent"))
        out.append((record.id, RDFS_LABEL, Literal(record.display_name)))
        out.append((record.id, STRUCT_ROLE, Literal(record.role.value)))
    elif isinstance(record, model.SnippetNode):
        out.append((record.id, RDF_TYPE, STRUCT_NS + LEVEL_CLASS[record.level]))
        out.append((record.id, STRUCT_TEXT, Literal(record.text)))
        out.append((record.id, STRUCT_POSITION, _integer(record.order)))
        if record.parent:
            out.append((record.id, STRUCT_PART_OF, record.parent))
        if record.subtype:
            out.append((record.id, STRUCT_TYPE_TAG, Literal(record.subtype)))
        if record.previous_version:
            out.append((record.id, lf + "isUpdateOf", record.previous_version))
        if record.created_at:
            out.append((record.id, DCT_CREATED, _datetime(record.created_at)))
    elif isinstance(record, model.ReviewComment):
        out.append((record.id, RDF_TYPE, lf + "ReviewComment"))
        out.append((record.id, RDF_TYPE, lf + ASPECT_CLASS[record.aspect]))
        out.append((record.id, RDF_TYPE, lf + POLARITY_CLASS[record.polarity]))
        out.append((record.id, RDF_TYPE, lf + ACTION_CLASS[record.action_needed]))
        out.append((record.id, lf + "refersTo", record.refers_to))
        out.append((record.id, lf + "hasCommentText", Literal(record.text)))
        out.append((record.id, lf + "hasCommentAuthor", record.author))
        out.append((record.id, lf + "hasImpact", _integer(record.impact.value)))
        if record.previous_version:
            out.append((record.id, lf + "isUpdateOf", record.previous_version))
        if record.created_at:
            out.append((record.id, DCT_CREATED, _datetime(record.created_at)))
    elif isinstance(record, model.ResponseComment):
        out.append((record.id, RDF_TYPE, lf + "ResponseComment"))
        out.append((record.id, RDF_TYPE, lf + AGREEMENT_CLASS[record.agreement]))
        out.append((record.id, lf + "isResponseTo", record.is_response_to))
        out.append((record.id, lf + "hasCommentText", Literal(record.text)))
        out.append((record.id, lf + "hasCommentAuthor", record.author))
        if record.created_at:
            out.append((record.id, DCT_CREATED, _datetime(record.created_at)))
    elif isinstance(record, model.ActionCheckComment):
        out.append((record.id, RDF_TYPE, lf + "ActionCheckComment"))
        out.append((record.id, RDF_TYPE, lf + STATUS_CLASS[record.status]))
        out.append((record.id, lf + "isResponseTo", record.is_response_to))
        out.append((record.id, lf + "hasCommentText", Literal(record.text)))
        out.append((record.id, lf + "hasCommentAuthor", record.author))
        if record.created_at:
            out.append((record.id, DCT_CREATED, _datetime(record.created_at)))
    else:
        raise ModelViolationError(f"cannot serialize {type(record).__name__}")
    return out


def export_turtle(
    view: Iterable[NodeEnvelope],
    subset_filter: Optional[Callable[[NodeEnvelope], bool]] = None,
) -> str:
    """Serialize envelopes (a store or any subset) to canonical Turtle.

    Output is deterministic: identical stores yield byte-identical text.
    """
    triples: list[Triple] = []
    for env in view:
        if subset_filter is not None and not subset_filter(env):
            continue
        triples.extend(triples_for_record(env.record()))
    return serialize(triples, dict(BASE_PREFIXES))


@dataclass
class ImportResult:
    envelopes: list[NodeEnvelope] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def iris(self) -> list[str]:
        return [env.id for env in self.envelopes]


def _subject_index(triples: list[Triple]) -> dict[str, list[tuple[str, Term]]]:
    index: dict[str, list[tuple[str, Term]]] = {}
    for s, p, o in triples:
        index.setdefault(s, []).append((p, o))
    return index


def _one_class(
    subject: str,
    types: set[str],
    mapping: dict[str, object],
    dimension: str,
    required: bool,
) -> Optional[object]:
    hits = [mapping[t] for t in types if t in mapping]
    if len(hits) > 1:
        raise ModelViolationError(
            f"{subject} carries {len(hits)} {dimension} classes; the categories are disjoint"
        )
    if not hits:
        if required:
            raise ModelViolationError(f"{subject} is missing its {dimension} class")
        return None
    return hits[0]


def _literal_value(subject: str, pairs: list[tuple[str, Term]], predicate: str) -> Optional[str]:
    values = [o for p, o in pairs if p == predicate]
    if not values:
        return None
    if len(values) > 1:
        raise ModelViolationError(f"{subject} has multiple values for {predicate}")
    obj = values[0]
    if not isinstance(obj, Literal):
        raise ModelViolationError(f"{subject}: {predicate} expects a literal")
    return obj.value


def _iri_value(subject: str, pairs: list[tuple[str, Term]], predicate: str) -> Optional[str]:
    values = [o for p, o in pairs if p == predicate]
    if not values:
        return None
    if len(values) > 1:
        raise ModelViolationError(f"{subject} has multiple values for {predicate}")
    obj = values[0]
    if isinstance(obj, Literal):
        raise ModelViolationError(f"{subject}: {predicate} expects an IRI")
    return obj


def import_turtle(text: str, base_namespace: str = storemod.DEFAULT_BASE) -> ImportResult:
    """Parse instance Turtle back into typed envelopes, ready for a batch put.

    Unknown classes and predicates are reported in `warnings`, never silently
    dropped.  Structural contradictions (e.g. two aspect classes on one
    comment) raise ModelViolationError.
    """
    _, triples = parse(text)
    result = ImportResult()
    subjects = _subject_index(triples)

    for subject in subjects:
        pairs = subjects[subject]
        for p, _o in pairs:
            if p not in ALLOWED_PREDICATES:
                result.warnings.append(f"unknown predicate {p} on {subject}")
        types = {o for p, o in pairs if p == RDF_TYPE and isinstance(o, str)}
        known_class_ns = {VOCAB_NS + t.local_name for t in VOCABULARY if t.term_kind is TermKind.CLASS}
        known_struct = {STRUCT_NS + name for name in STRUCT_CLASSES}
        for t in types:
            if t not in known_class_ns and t not in known_struct:
                result.warnings.append(f"unknown class {t} on {subject}")

        local_types = {t[len(VOCAB_NS):] for t in types if t.startswith(VOCAB_NS)}
        struct_types = {t[len(STRUCT_NS):] for t in types if t.startswith(STRUCT_NS)}

        payload: dict = {}
        created = _literal_value(subject, pairs, DCT_CREATED)

        is_review = bool(local_types & ({"ReviewComment"} | set(_CLASS_ASPECT) | set(_CLASS_POLARITY) | set(_CLASS_ACTION)))
        is_response = bool(local_types & ({"ResponseComment"} | set(_CLASS_AGREEMENT)))
        is_check = bool(local_types & ({"ActionCheckComment"} | set(_CLASS_STATUS)))
        is_snippet = bool(struct_types & set(_CLASS_LEVEL))
        is_agent = "Agent" in struct_types

        if sum([is_review, is_response, is_check, is_snippet, is_agent]) > 1:
            raise ModelViolationError(f"{subject} mixes incompatible node kinds: {sorted(types)}")

        if is_review:
            aspect = _one_class(subject, local_types, _CLASS_ASPECT, "aspect", required=True)
            polarity = _one_class(subject, local_types, _CLASS_POLARITY, "polarity", required=True)
            action = _one_class(subject, local_types, _CLASS_ACTION, "action-needed", required=True)
            impact = _literal_value(subject, pairs, VOCAB_NS + "hasImpact")
            if impact is None:
                raise ModelViolationError(f"{subject} is missing hasImpact")
            payload = {
                "refersTo": _iri_value(subject, pairs, VOCAB_NS + "refersTo"),
                "text": _literal_value(subject, pairs, VOCAB_NS + "hasCommentText") or "",
                "author": _iri_value(subject, pairs, VOCAB_NS + "hasCommentAuthor"),
                "aspect": aspect.value,
                "polarity": polarity.value,
                "actionNeeded": action.value,
                "impact": int(impact),
                "previousVersion": _iri_value(subject, pairs, VOCAB_NS + "isUpdateOf"),
            }
            kind = NodeKind.REVIEW_COMMENT
        elif is_response:
            agreement = _one_class(subject, local_types, _CLASS_AGREEMENT, "agreement", required=True)
            payload = {
                "isResponseTo": _iri_value(subject, pairs, VOCAB_NS + "isResponseTo"),
                "author": _iri_value(subject, pairs, VOCAB_NS + "hasCommentAuthor"),
                "text": _literal_value(subject, pairs, VOCAB_NS + "hasCommentText") or "",
                "agreement": agreement.value,
            }
            kind = NodeKind.RESPONSE_COMMENT
        elif is_check:
            status = _one_class(subject, local_types, _CLASS_STATUS, "point-status", required=True)
            payload = {
                "isResponseTo": _iri_value(subject, pairs, VOCAB_NS + "isResponseTo"),
                "author": _iri_value(subject, pairs, VOCAB_NS + "hasCommentAuthor"),
                "text": _literal_value(subject, pairs, VOCAB_NS + "hasCommentText") or "",
                "status": status.value,
            }
            kind = NodeKind.ACTION_CHECK_COMMENT
        elif is_snippet:
            level = _one_class(subject, struct_types, _CLASS_LEVEL, "granularity", required=True)
            position = _literal_value(subject, pairs, STRUCT_POSITION)
            payload = {
                "level": level.value,
                "text": _literal_value(subject, pairs, STRUCT_TEXT) or "",
                "parent": _iri_value(subject, pairs, STRUCT_PART_OF),
                "order": int(position) if position is not None else 0,
                "previousVersion": _iri_value(subject, pairs, VOCAB_NS + "isUpdateOf"),
                "subtype": _literal_value(subject, pairs, STRUCT_TYPE_TAG),
            }
            kind = NodeKind.SNIPPET
        elif is_agent:
            payload = {
                "displayName": _literal_value(subject, pairs, RDFS_LABEL) or "",
                "role": _literal_value(subject, pairs, STRUCT_ROLE),
            }
            kind = NodeKind.AGENT
        else:
            result.warnings.append(f"subject {subject} has no recognized type; skipped")
            continue

        if created:
            payload["createdAt"] = created
        payload = {k: v for k, v in payload.items() if v is not None}
        required = {
            NodeKind.REVIEW_COMMENT: ("refersTo", "author"),
            NodeKind.RESPONSE_COMMENT: ("isResponseTo", "author"),
            NodeKind.ACTION_CHECK_COMMENT: ("isResponseTo", "author"),
            NodeKind.AGENT: ("role",),
            NodeKind.SNIPPET: (),
        }[kind]
        for key in required:
            if key not in payload:
                raise ModelViolationError(f"{subject} is missing {key}")
        env = make_envelope(kind, payload, base_namespace)
        result.envelopes.append(env)

    result.envelopes = _dependency_order(result.envelopes)
    return result


def _dependency_order(envelopes: list[NodeEnvelope]) -> list[NodeEnvelope]:
    """Order a batch so in-batch references come before their dependents."""
    by_id = {env.id: env for env in envelopes}
    deps: dict[str, set[str]] = {}
    for env in envelopes:
        refs = set()
        for key in ("parent", "previousVersion", "refersTo", "isResponseTo", "author"):
            value = env.payload.get(key)
            if value in by_id and value != env.id:
                refs.add(value)
        deps[env.id] = refs
    ordered: list[NodeEnvelope] = []
    done: set[str] = set()
    remaining = {env.id for env in envelopes}
    while remaining:
        ready = sorted(i for i in remaining if deps[i] <= done)
        if not ready:
            # Reference cycle inside the batch; surface it via store validation.
            ordered.extend(by_id[i] for i in sorted(remaining))
            break
        for i in ready:
            ordered.append(by_id[i])
            done.add(i)
            remaining.discard(i)
    return ordered


def emit_ontology() -> str:
    """Turtle declaration of the full 24-term vocabulary with its subclass tree."""
    prefixes = {
        "lf": VOCAB_NS,
        "rdfs": RDFS_NS,
        "owl": OWL_NS,
        "xsd": XSD,
    }
    kind_class = {
        TermKind.CLASS: OWL_NS + "Class",
        TermKind.OBJECT_PROPERTY: OWL_NS + "ObjectProperty",
        TermKind.DATATYPE_PROPERTY: OWL_NS + "DatatypeProperty",
    }
    triples: list[Triple] = []
    for term in VOCABULARY:
        iri = VOCAB_NS + term.local_name
        triples.append((iri, RDF_TYPE, kind_class[term.term_kind]))
        if term.superclass:
            triples.append((iri, RDFS_SUBCLASS, VOCAB_NS + term.superclass))
    triples.append((VOCAB_NS + "hasImpact", RDFS_RANGE, XSD + "integer"))
    triples.append((VOCAB_NS + "hasCommentText", RDFS_RANGE, XSD + "string"))
    return serialize(triples, prefixes)


def import_vocabulary(text: str) -> list[VocabularyTerm]:
    """Schema-mode import: read term declarations out of an ontology document."""
    _, triples = parse(text)
    class_of = {
        OWL_NS + "Class": TermKind.CLASS,
        OWL_NS + "ObjectProperty": TermKind.OBJECT_PROPERTY,
        OWL_NS + "DatatypeProperty": TermKind.DATATYPE_PROPERTY,
    }
    supers = {s: o for s, p, o in triples if p == RDFS_SUBCLASS and isinstance(o, str)}
    terms = []
    for s, p, o in triples:
        if p == RDF_TYPE and isinstance(o, str) and o in class_of:
            local = s[len(VOCAB_NS):] if s.startswith(VOCAB_NS) else s
            sup = supers.get(s)
            sup_local = sup[len(VOCAB_NS):] if sup and sup.startswith(VOCAB_NS) else None
            terms.append(VocabularyTerm(local, class_of[o], sup_local))
    return sorted(terms, key=lambda t: t.local_name)
