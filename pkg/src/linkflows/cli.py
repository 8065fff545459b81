"""Command-line interface: one thin subcommand per module."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import analytics, ingest, model, rdfio, sentiment
from .errors import LinkflowsError, ProblemReport, ValidationFailedError
from .service import ProblemException, run_metric
from .store import DEFAULT_BASE, GraphStore, NodeKind, make_envelope, payload_from_record

ROLE_CHOICES = [r.value for r in model.Role]


def _open_store(ctx: click.Context, create: bool = False) -> GraphStore:
    path = ctx.obj.get("store")
    if not path:
        raise click.UsageError("no store path: pass --store or set LINKFLOWS_STORE")
    return GraphStore(path, base_namespace=ctx.obj.get("base") or DEFAULT_BASE, create=create)


def _fail(report: ProblemReport) -> None:
    click.echo(json.dumps(report.to_dict(), indent=2), err=True)
    sys.exit(1)


def _author_iri(store: GraphStore, author: Optional[str], name: Optional[str], role: Optional[str]) -> str:
    if author:
        if store.get_record(author) is None:
            _fail(ProblemReport(404, "unknown-author", f"author IRI does not resolve: {author}"))
        return author
    if not name or not role:
        raise click.UsageError("pass --author IRI, or --author-name with --author-role")
    env = make_envelope(
        NodeKind.AGENT, {"displayName": name, "role": role}, store.base_namespace
    )
    store.put_node(env)
    return env.id


def _emit(data: dict, out_format: str) -> None:
    if out_format == "json-lines":
        click.echo(json.dumps(data, sort_keys=True))
    else:
        _print_table(data)


def _print_table(data: dict, indent: int = 0) -> None:
    pad = "  " * indent
    for key, value in data.items():
        if isinstance(value, dict):
            click.echo(f"{pad}{key}:")
            _print_table(value, indent + 1)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            click.echo(f"{pad}{key}:")
            for entry in value:
                _print_table(entry, indent + 1)
                click.echo(f"{pad}  -")
        else:
            if isinstance(value, float):
                value = f"{value:.4f}"
            click.echo(f"{pad}{key}: {value}")


@click.group()
@click.option("--store", envvar="LINKFLOWS_STORE", type=click.Path(), help="store directory")
@click.option("--base", envvar="LINKFLOWS_BASE", default=None, help="base namespace for minted IRIs")
@click.pass_context
def main(ctx: click.Context, store: Optional[str], base: Optional[str]) -> None:
    """Linkflows: snippet-level review graphs and their agreement analytics."""
    ctx.ensure_object(dict)
    ctx.obj["store"] = store
    ctx.obj["base"] = base


@main.command("ingest")
@click.option("--article", "article_file", type=click.Path(exists=True), help="article text to segment and store")
@click.option("--review", "review_file", type=click.Path(exists=True), help="review text to split into snippets")
@click.option("--article-iri", default=None, help="article the review refers to (recorded in the output)")
@click.option("--out-format", type=click.Choice(["table", "json-lines"]), default="json-lines")
@click.pass_context
def ingest_cmd(ctx, article_file, review_file, article_iri, out_format):
    """Segment an article into the store, or split a review into snippets."""
    if article_file:
        store = _open_store(ctx, create=True)
        text = Path(article_file).read_text(encoding="utf-8")
        result = ingest.segment_article(text, base_namespace=store.base_namespace)
        envelopes = []
        for node in result.all_nodes():
            kind, payload = payload_from_record(node)
            envelopes.append(make_envelope(kind, payload, store.base_namespace))
        store.put_batch(envelopes)
        _emit(
            {
                "article": result.root.id,
                "sections": [s.id for s in result.sections],
                "paragraphs": [p.id for p in result.paragraphs],
                "reconstructionChecksum": result.reconstruction_checksum,
            },
            out_format,
        )
        return
    if review_file:
        text = Path(review_file).read_text(encoding="utf-8")
        snippets = ingest.split_review(text)
        for snippet in snippets:
            row = snippet.to_dict()
            if article_iri:
                row["articleIri"] = article_iri
            click.echo(json.dumps(row, sort_keys=True))
        return
    raise click.UsageError("pass --article FILE or --review FILE")


@main.command("comment")
@click.option("--refers-to", required=True, help="target snippet IRI")
@click.option("--text", required=True)
@click.option("--aspect", required=True, type=click.Choice([a.value for a in model.Aspect]))
@click.option("--polarity", required=True, type=click.Choice([p.value for p in model.Polarity]))
@click.option("--action-needed", required=True, type=click.Choice([a.value for a in model.ActionNeeded]))
@click.option("--impact", required=True, type=int)
@click.option("--author", default=None, help="existing agent IRI")
@click.option("--author-name", default=None)
@click.option("--author-role", default=None, type=click.Choice(ROLE_CHOICES))
@click.pass_context
def comment_cmd(ctx, refers_to, text, aspect, polarity, action_needed, impact, author, author_name, author_role):
    """Attach a fully classified review comment to a snippet."""
    store = _open_store(ctx)
    author_id = _author_iri(store, author, author_name, author_role)
    payload = {
        "refersTo": refers_to,
        "text": text,
        "author": author_id,
        "aspect": aspect,
        "polarity": polarity,
        "actionNeeded": action_needed,
        "impact": impact,
        "createdAt": model.format_timestamp(model.utc_now()),
    }
    env = make_envelope(NodeKind.REVIEW_COMMENT, payload, store.base_namespace)
    store.put_node(env)
    click.echo(env.id)


@main.command("respond")
@click.option("--to", "parent", required=True, help="comment IRI being answered")
@click.option("--agreement", required=True, type=click.Choice([a.value for a in model.Agreement]))
@click.option("--text", required=True)
@click.option("--author", default=None)
@click.option("--author-name", default=None)
@click.option("--author-role", default="author", type=click.Choice(ROLE_CHOICES))
@click.pass_context
def respond_cmd(ctx, parent, agreement, text, author, author_name, author_role):
    """Record the author's agree / partially-agree / disagree reply."""
    store = _open_store(ctx)
    author_id = _author_iri(store, author, author_name, author_role)
    payload = {
        "isResponseTo": parent,
        "author": author_id,
        "text": text,
        "agreement": agreement,
        "createdAt": model.format_timestamp(model.utc_now()),
    }
    env = make_envelope(NodeKind.RESPONSE_COMMENT, payload, store.base_namespace)
    store.put_node(env)
    click.echo(env.id)


@main.command("check")
@click.option("--to", "parent", required=True, help="comment IRI being checked")
@click.option("--status", required=True, type=click.Choice([s.value for s in model.CheckStatus]))
@click.option("--text", required=True)
@click.option("--author", default=None)
@click.option("--author-name", default=None)
@click.option("--author-role", default="editor", type=click.Choice(ROLE_CHOICES))
@click.pass_context
def check_cmd(ctx, parent, status, text, author, author_name, author_role):
    """Record whether a raised point was addressed."""
    store = _open_store(ctx)
    author_id = _author_iri(store, author, author_name, author_role)
    payload = {
        "isResponseTo": parent,
        "author": author_id,
        "text": text,
        "status": status,
        "createdAt": model.format_timestamp(model.utc_now()),
    }
    env = make_envelope(NodeKind.ACTION_CHECK_COMMENT, payload, store.base_namespace)
    store.put_node(env)
    click.echo(env.id)


@main.command("export")
@click.option("--format", "fmt", default="turtle", type=click.Choice(["turtle"]))
@click.option("--out", type=click.Path(), default=None, help="write to file instead of stdout")
@click.pass_context
def export_cmd(ctx, fmt, out):
    """Serialize the whole store as Turtle."""
    store = _open_store(ctx)
    text = rdfio.export_turtle(store.iter_envelopes())
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command("import")
@click.argument("source", type=click.Path(), required=False)
@click.option("--into", "target", required=True, type=click.Path(), help="target store directory")
@click.option("--base", default=None, help="base namespace for the target store")
@click.pass_context
def import_cmd(ctx, source, target, base):
    """Read a Turtle document (file or stdin) into a store."""
    text = Path(source).read_text(encoding="utf-8") if source and source != "-" else sys.stdin.read()
    namespace = base or ctx.obj.get("base") or DEFAULT_BASE
    store = GraphStore(target, base_namespace=namespace, create=True)
    result = rdfio.import_turtle(text, base_namespace=store.base_namespace)
    iris = store.put_batch(result.envelopes)
    for warning in result.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(json.dumps({"imported": len(iris), "warnings": len(result.warnings)}))


@main.command("analyze")
@click.argument(
    "metric",
    type=click.Choice(
        ["distribution", "kappa", "disagreement", "baseline", "subgroups", "wilcoxon", "accuracy", "no-answer"]
    ),
)
@click.option("--dimension", default=None)
@click.option("--annotations", default=None, type=click.Path())
@click.option("--group", default=None)
@click.option("--group-a", default=None)
@click.option("--group-b", default=None)
@click.option("--size", default=None, type=int)
@click.option("--seed", default=None, type=int)
@click.option("--trials", default=None, type=int)
@click.option("--mode", default=None)
@click.option("--diffs", default=None, help="comma-separated paired differences")
@click.option("--predictions", default=None, type=click.Path())
@click.option("--truth", default=None, type=click.Path())
@click.option("--peer-group", default=None)
@click.option("--reference-group", default=None)
@click.option("--restrict-to-complete", is_flag=True, default=False)
@click.option("--out-format", type=click.Choice(["table", "json-lines"]), default="table")
@click.pass_context
def analyze_cmd(ctx, metric, out_format, **options):
    """Run one analytics metric; mirrors GET /api/analytics/{metric} 1:1."""
    params = {}
    mapping = {
        "dimension": "dimension",
        "annotations": "annotations",
        "group": "group",
        "group_a": "groupA",
        "group_b": "groupB",
        "size": "size",
        "seed": "seed",
        "trials": "trials",
        "mode": "mode",
        "diffs": "diffs",
        "predictions": "predictions",
        "truth": "truth",
        "peer_group": "peerGroup",
        "reference_group": "referenceGroup",
    }
    for key, param in mapping.items():
        value = options.get(key)
        if value is not None:
            params[param] = str(value)
    if options.get("restrict_to_complete"):
        params["restrictToComplete"] = "true"
    store = None
    if metric == "distribution":
        store = _open_store(ctx)
    report = run_metric(store, metric, params)
    _emit(report, out_format)


@main.group("sentiment")
def sentiment_group():
    """Lexicon-based polarity classification."""


@sentiment_group.command("classify")
@click.option("--lexicon", "lexicon_file", type=click.Path(exists=True), default=None,
              help="lexicon file (defaults to the bundled review lexicon)")
@click.option("--text", default=None, help="classify one text given inline")
@click.option("--input", "input_file", type=click.Path(exists=True), default=None,
              help="file with one item<TAB>text per line")
@click.option("--epsilon", default=sentiment.DEFAULT_EPSILON, type=float, show_default=True)
@click.option("--out-format", type=click.Choice(["table", "json-lines"]), default="json-lines")
def sentiment_classify(lexicon_file, text, input_file, epsilon, out_format):
    """Classify text(s) as negative / neutral / positive."""
    lexicon = sentiment.Lexicon.from_file(lexicon_file) if lexicon_file else sentiment.bundled_lexicon()
    if text is not None:
        prediction = sentiment.classify(text, lexicon, epsilon)
        _emit(prediction.to_dict(), out_format)
        return
    if input_file is None:
        raise click.UsageError("pass --text or --input FILE")
    items = []
    for line in Path(input_file).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        item, _, body = line.partition("\t")
        items.append((item.strip(), body.strip()) if body else (None, item.strip()))
    for prediction in sentiment.batch_classify(items, lexicon, epsilon):
        _emit(prediction.to_dict(), out_format)


@main.command("sample")
@click.option("--k", required=True, type=int)
@click.option("--input", "input_file", required=True, type=click.Path(exists=True),
              help="file with one title per line")
def sample_cmd(k, input_file):
    """Pick the k titles with the smallest SHA-256 digests (deterministic)."""
    lines = [
        line for line in Path(input_file).read_text(encoding="utf-8").splitlines() if line.strip()
    ]
    for item in ingest.sample_smallest_hash(lines, k):
        click.echo(item)


@main.command("serve")
@click.option("--bind", default="127.0.0.1:8077", show_default=True, help="host:port")
@click.option("--init", "init_store", is_flag=True, default=False, help="create the store if missing")
@click.option("--read-only", is_flag=True, default=False)
@click.option("--ui", "with_ui", is_flag=True, default=False, help="serve the browser UI")
@click.option("--ui-dir", type=click.Path(), default="frontend/dist", show_default=True)
@click.pass_context
def serve_cmd(ctx, bind, init_store, read_only, with_ui, ui_dir):
    """Run the HTTP API (and optionally the UI) over a store."""
    import uvicorn

    from .service import create_app

    store = _open_store(ctx, create=init_store)
    ui_path = Path(ui_dir) if with_ui else None
    if ui_path is not None and not ui_path.exists():
        raise click.UsageError(f"UI directory not found: {ui_path} (build the frontend first)")
    app = create_app(store, read_only=read_only, ui_dir=ui_path)
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or "8077"), log_level="warning")


def entrypoint() -> None:
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(130)
    except ProblemException as exc:
        _fail(exc.report)
    except ValidationFailedError as exc:
        _fail(ProblemReport(400, exc.code, exc.detail, exc.violations))
    except LinkflowsError as exc:
        _fail(ProblemReport(400, exc.code, exc.detail))


if __name__ == "__main__":
    entrypoint()
