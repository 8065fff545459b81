"""HTTP API over the store: dereferenceable node URLs plus the REST surface
used by the CLI `serve` command and the browser UI.

Every non-2xx response body is one ProblemReport.  Mutating endpoints are
idempotent for byte-identical payloads because IRIs are content-addressed.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import analytics, ingest, model, rdfio, sentiment
from .errors import (
    AnalyticsError,
    CollisionError,
    EmptyInputError,
    LinkflowsError,
    NotFoundError,
    ProblemReport,
    ReferenceUnresolvedError,
    UnknownIdError,
    ValidationFailedError,
    Violation,
)
from .model import ThreadNode
from .store import GraphStore, NodeKind, make_envelope, payload_from_record

JSON_MEDIA = "application/json"
TURTLE_MEDIA = "text/turtle"


class ProblemException(Exception):
    def __init__(self, status: int, code: str, detail: str, violations: Optional[list[Violation]] = None):
        self.report = ProblemReport(status, code, detail, violations or [])


def _bad_request(code: str, detail: str, violations: Optional[list[Violation]] = None):
    return ProblemException(400, code, detail, violations)


def _resolve_ref(store: GraphStore, ref: str) -> str:
    """Accept either a full IRI or a path relative to the store namespace."""
    if ref.startswith("http://") or ref.startswith("https://"):
        return ref
    return store.base_namespace + ref


def _thread_to_dict(store: GraphStore, node: ThreadNode) -> dict:
    env = store.get_node(node.record.id)
    return {
        "id": env.id,
        "kind": env.kind.value,
        "payload": env.payload,
        "children": [_thread_to_dict(store, child) for child in node.children],
    }


def _author_iri(store: GraphStore, author, read_only: bool) -> str:
    """An author field is an existing agent IRI or an inline {displayName, role}."""
    if isinstance(author, str):
        if store.get_record(author) is None:
            raise _bad_request("unknown-author", f"author IRI does not resolve: {author}")
        return author
    if isinstance(author, dict):
        try:
            role = model.Role(author.get("role", ""))
        except ValueError:
            raise _bad_request("bad-role", f"unknown role {author.get('role')!r}") from None
        name = author.get("displayName", "")
        if not name:
            raise _bad_request("bad-author", "author displayName must be non-empty")
        if read_only:
            raise ProblemException(403, "read-only", "store is read-only")
        env = make_envelope(
            NodeKind.AGENT, {"displayName": name, "role": role.value}, store.base_namespace
        )
        store.put_node(env)
        return env.id
    raise _bad_request("bad-author", "author must be an IRI or {displayName, role}")


def _tree_counts(store: GraphStore, snippet_iri: str) -> int:
    return len(store.query(kind=NodeKind.REVIEW_COMMENT, target=snippet_iri))


def run_metric(store: GraphStore, metric: str, params: Mapping[str, str]) -> dict:
    """Shared analytics dispatch: the API routes and `linkflows analyze` both
    call this, so their JSON reports are identical by construction."""

    def need(name: str) -> str:
        value = params.get(name)
        if value is None or value == "":
            raise _bad_request("missing-parameter", f"query parameter {name!r} is required")
        return value

    def load_records(name: str = "annotations") -> list[analytics.AnnotationRecord]:
        path = Path(need(name))
        if not path.exists():
            raise _bad_request("missing-file", f"{name} file not found: {path}")
        return analytics.parse_annotation_table(path.read_text(encoding="utf-8"))

    def load_labels(name: str) -> dict[str, str]:
        path = Path(need(name))
        if not path.exists():
            raise _bad_request("missing-file", f"{name} file not found: {path}")
        labels: dict[str, str] = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            item, _, label = line.partition("\t")
            if not label:
                raise _bad_request("bad-label-row", f"expected item<TAB>label, got {line!r}")
            labels[item.strip()] = label.strip()
        return labels

    def intp(name: str, default: Optional[int] = None) -> Optional[int]:
        raw = params.get(name)
        if raw is None or raw == "":
            return default
        try:
            return int(raw)
        except ValueError:
            raise _bad_request("bad-parameter", f"{name} must be an integer, got {raw!r}") from None

    if metric == "distribution":
        return analytics.distribution_report(store).to_dict()

    if metric == "baseline":
        dimension = need("dimension")
        mode = params.get("mode", "analytic")
        trials = intp("trials")
        seed = intp("seed")
        value = analytics.random_baseline(dimension, mode, trials=trials, seed=seed)
        out = {"dimension": dimension, "mode": mode, "value": value}
        if mode != "analytic":
            out["trials"] = trials
            out["seed"] = seed
        return out

    if metric == "kappa":
        records = load_records()
        report = analytics.kappa_from_records(
            records,
            need("dimension"),
            group=params.get("group") or None,
            restrict_to_complete=params.get("restrictToComplete", "") in ("1", "true", "yes"),
        )
        out = report.to_dict()
        out["nRecords"] = len(records)
        return out

    if metric == "disagreement":
        records = load_records()
        dimension = need("dimension")
        group_a, group_b = need("groupA"), need("groupB")
        responses_a = analytics.responses_by_item(records, dimension, group_a)
        responses_b = analytics.responses_by_item(records, dimension, group_b)
        report = analytics.disagreement_score(responses_a, responses_b, dimension, group_a, group_b)
        out = report.to_dict()
        out["nRecords"] = len(records)
        return out

    if metric == "subgroups":
        records = load_records()
        dimension = need("dimension")
        size = intp("size")
        if size is None:
            raise _bad_request("missing-parameter", "query parameter 'size' is required")
        seed = intp("seed", 0)
        peer_group = params.get("peerGroup", "peers")
        reference_group = params.get("referenceGroup", "reviewer")
        peers = [r for r in records if r.group == peer_group]
        reference = analytics.responses_by_item(records, dimension, reference_group)
        report = analytics.subgroup_analysis(peers, reference, dimension, size, seed)
        out = report.to_dict()
        out["peerGroup"] = peer_group
        out["referenceGroup"] = reference_group
        out["nRecords"] = len(records)
        return out

    if metric == "wilcoxon":
        raw = need("diffs")
        try:
            diffs = [float(x) for x in raw.split(",") if x.strip() != ""]
        except ValueError:
            raise _bad_request("bad-parameter", f"diffs must be comma-separated numbers: {raw!r}") from None
        result = analytics.wilcoxon_signed_rank(diffs)
        out = result.to_dict()
        out["nInput"] = len(diffs)
        return out

    if metric == "accuracy":
        predictions = load_labels("predictions")
        truth = load_labels("truth")
        shared = sorted(set(predictions) & set(truth))
        value = analytics.classifier_accuracy(predictions, truth)
        return {
            "accuracy": value,
            "nShared": len(shared),
            "nPredictions": len(predictions),
            "nTruth": len(truth),
        }

    if metric == "no-answer":
        records = load_records()
        out = analytics.no_answer_report(records).to_dict()
        out["nRecords"] = len(records)
        return out

    raise ProblemException(404, "unknown-metric", f"no analytics metric {metric!r}")


def create_app(store: GraphStore, read_only: bool = False, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="linkflows", docs_url=None, redoc_url=None)

    @app.exception_handler(ProblemException)
    async def _problem_handler(_req: Request, exc: ProblemException):
        return JSONResponse(status_code=exc.report.status, content=exc.report.to_dict())

    def fail(status: int, exc: LinkflowsError, violations: Optional[list[Violation]] = None):
        raise ProblemException(status, exc.code, exc.detail, violations)

    def guard_write() -> None:
        if read_only:
            raise ProblemException(403, "read-only", "store is read-only; mutation rejected")

    async def body_of(request: Request) -> dict:
        try:
            data = await request.json()
        except json.JSONDecodeError:
            raise _bad_request("bad-json", "request body must be a JSON object") from None
        if not isinstance(data, dict):
            raise _bad_request("bad-json", "request body must be a JSON object")
        return data

    @app.get("/nodes/{ref:path}")
    def get_node(ref: str, request: Request):
        iri = _resolve_ref(store, ref)
        try:
            env = store.get_node(iri)
        except NotFoundError as exc:
            fail(404, exc)
        accept = request.headers.get("accept", JSON_MEDIA)
        wants_turtle = TURTLE_MEDIA in accept
        wants_json = JSON_MEDIA in accept or "*/*" in accept or accept.strip() == ""
        headers = {
            "ETag": f'"{env.content_hash}"',
            "Cache-Control": "public, max-age=31536000, immutable",
        }
        if wants_turtle:
            body = rdfio.export_turtle([env])
            return Response(content=body, media_type=TURTLE_MEDIA, headers=headers)
        if wants_json:
            return JSONResponse(content=env.to_dict(), headers=headers)
        raise ProblemException(406, "unsupported-format", f"cannot satisfy Accept: {accept}")

    @app.get("/api/articles")
    def list_articles():
        articles = store.query(kind=NodeKind.SNIPPET, level=model.GranularityLevel.ARTICLE)
        return {"articles": [env.to_dict() for env in articles]}

    @app.get("/api/articles/{ref:path}")
    def get_article(ref: str):
        iri = _resolve_ref(store, ref)
        record = store.get_record(iri)
        if not isinstance(record, model.SnippetNode) or record.level is not model.GranularityLevel.ARTICLE:
            raise ProblemException(404, "not-found", f"no article {iri}")
        snippets = []
        by_parent: dict[str, list[model.SnippetNode]] = {}
        for rec in store.iter_records():
            if isinstance(rec, model.SnippetNode) and rec.parent:
                by_parent.setdefault(rec.parent, []).append(rec)
        for kids in by_parent.values():
            kids.sort(key=lambda n: (n.order, n.id))

        def walk(node: model.SnippetNode) -> None:
            snippets.append(
                {
                    "id": node.id,
                    "level": node.level.value,
                    "text": node.text,
                    "parent": node.parent,
                    "order": node.order,
                    "commentCount": _tree_counts(store, node.id),
                }
            )
            for child in by_parent.get(node.id, []):
                walk(child)

        walk(record)
        return {"article": iri, "snippets": snippets}

    @app.post("/api/articles", status_code=201)
    async def post_article(request: Request):
        guard_write()
        data = await body_of(request)
        text = data.get("text", "")
        try:
            result = ingest.segment_article(text, base_namespace=store.base_namespace)
        except EmptyInputError as exc:
            fail(400, exc)
        envelopes = []
        for node in result.all_nodes():
            kind, payload = payload_from_record(node)
            envelopes.append(make_envelope(kind, payload, store.base_namespace))
        try:
            store.put_batch(envelopes)
        except CollisionError as exc:
            fail(409, exc)
        return {
            "article": result.root.id,
            "sections": [s.id for s in result.sections],
            "paragraphs": [p.id for p in result.paragraphs],
            "reconstructionChecksum": result.reconstruction_checksum,
        }

    @app.post("/api/comments", status_code=201)
    async def post_comment(request: Request):
        guard_write()
        data = await body_of(request)
        refers_to = data.get("refersTo", "")
        if not refers_to:
            raise _bad_request("missing-field", "refersTo is required")
        if store.get_record(refers_to) is None:
            raise ProblemException(404, "dangling-target", f"refersTo does not resolve: {refers_to}")
        violations = []
        for name in ("aspect", "polarity", "actionNeeded", "impact"):
            if name not in data or data.get(name) in (None, ""):
                violations.append(Violation(f"missing-{name}", f"{name} is required"))
        if violations:
            raise _bad_request("validation-failed", "comment is not fully classified", violations)
        author = _author_iri(store, data.get("author"), read_only)
        payload = {
            "refersTo": refers_to,
            "text": data.get("text", ""),
            "author": author,
            "aspect": data.get("aspect"),
            "polarity": data.get("polarity"),
            "actionNeeded": data.get("actionNeeded"),
            "impact": data.get("impact"),
            "createdAt": model.format_timestamp(model.utc_now()),
        }
        if data.get("previousVersion"):
            payload["previousVersion"] = data["previousVersion"]
        env = make_envelope(NodeKind.REVIEW_COMMENT, payload, store.base_namespace)
        try:
            record = env.record()
        except model.ModelViolationError as exc:
            fail(400, exc)
        violations = model.validate_comment(record, model.resolver_from_view(store))
        if violations:
            raise _bad_request("validation-failed", "comment violates the model", violations)
        try:
            store.put_node(env)
        except ValidationFailedError as exc:
            raise _bad_request(exc.code, exc.detail, exc.violations) from None
        except ReferenceUnresolvedError as exc:
            fail(404, exc)
        return {"id": env.id}

    def _reply_endpoint(data: dict, kind: NodeKind, field: str, enum_cls) -> dict:
        parent_iri = data.get("isResponseTo", "")
        if not parent_iri:
            raise _bad_request("missing-field", "isResponseTo is required")
        parent = store.get_record(parent_iri)
        if parent is None or not isinstance(
            parent, (model.ReviewComment, model.ResponseComment, model.ActionCheckComment)
        ):
            raise ProblemException(404, "unknown-parent", f"isResponseTo does not resolve to a comment: {parent_iri}")
        if kind is NodeKind.ACTION_CHECK_COMMENT and isinstance(parent, model.ActionCheckComment):
            raise _bad_request("bad-parent", "action checks reply to review comments or responses")
        raw_value = data.get(field, "")
        try:
            value = enum_cls(raw_value)
        except ValueError:
            raise _bad_request(f"bad-{field}", f"unknown {field} value {raw_value!r}") from None
        author = _author_iri(store, data.get("author"), read_only)
        payload = {
            "isResponseTo": parent_iri,
            "author": author,
            "text": data.get("text", ""),
            field: value.value,
            "createdAt": model.format_timestamp(model.utc_now()),
        }
        env = make_envelope(kind, payload, store.base_namespace)
        try:
            store.put_node(env)
        except ValidationFailedError as exc:
            raise _bad_request(exc.code, exc.detail, exc.violations) from None
        except ReferenceUnresolvedError as exc:
            fail(404, exc)
        return {"id": env.id}

    @app.post("/api/responses", status_code=201)
    async def post_response(request: Request):
        guard_write()
        data = await body_of(request)
        return _reply_endpoint(data, NodeKind.RESPONSE_COMMENT, "agreement", model.Agreement)

    @app.post("/api/checks", status_code=201)
    async def post_check(request: Request):
        guard_write()
        data = await body_of(request)
        return _reply_endpoint(data, NodeKind.ACTION_CHECK_COMMENT, "status", model.CheckStatus)

    @app.get("/api/threads/{ref:path}")
    def get_threads(ref: str):
        iri = _resolve_ref(store, ref)
        if not store.exists(iri):
            raise ProblemException(404, "not-found", f"no node {iri}")
        comments = store.query(kind=NodeKind.REVIEW_COMMENT, target=iri)
        trees = []
        for env in comments:
            try:
                tree = model.thread_of(env.id, store)
            except UnknownIdError as exc:
                fail(404, exc)
            trees.append(_thread_to_dict(store, tree))
        return {"target": iri, "threads": trees}

    @app.get("/api/analytics/{metric}")
    def get_analytics(metric: str, request: Request):
        params = dict(request.query_params)
        try:
            return run_metric(store, metric, params)
        except AnalyticsError as exc:
            raise ProblemException(422, exc.code, exc.detail) from None

    @app.get("/api/store")
    def store_info():
        return {"manifest": store.manifest.to_dict(), "readOnly": read_only}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
