from __future__ import annotations

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from linkflows.cli import main
from linkflows.ingest import sample_smallest_hash
from linkflows.service import create_app
from linkflows.store import GraphStore, stores_isomorphic


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, **kwargs):
    result = runner.invoke(main, list(args), catch_exceptions=False, **kwargs)
    assert result.exit_code == 0, result.output
    return result


def test_ingest_article_creates_tree(runner, tmp_path, fixtures_dir):
    store_dir = tmp_path / "store"
    result = run(
        runner, "--store", str(store_dir), "ingest",
        "--article", str(fixtures_dir / "article.txt"),
    )
    tree = json.loads(result.output)
    assert len(tree["sections"]) == 2
    assert len(tree["paragraphs"]) == 5
    store = GraphStore(store_dir, create=False)
    assert len(store) == 8  # 1 article + 2 sections + 5 paragraphs


def test_ingest_review_prints_snippets(runner, fixtures_dir):
    result = run(runner, "ingest", "--review", str(fixtures_dir / "review.txt"),
                 "--article-iri", "https://linkflows.example/snippets/aaaaaaaaaaaaaaaa")
    rows = [json.loads(line) for line in result.output.splitlines()]
    assert len(rows) == 6
    assert rows[0]["articleIri"].endswith("aaaaaaaaaaaaaaaa")


def comment_flow(runner, tmp_path, fixtures_dir):
    store_dir = tmp_path / "store"
    tree = json.loads(
        run(runner, "--store", str(store_dir), "ingest",
            "--article", str(fixtures_dir / "article.txt")).output
    )
    target = tree["paragraphs"][0]
    comment = run(
        runner, "--store", str(store_dir), "comment",
        "--refers-to", target, "--text", "Needs a citation.",
        "--aspect", "content", "--polarity", "negative",
        "--action-needed", "actionNeeded", "--impact", "3",
        "--author-name", "Rivka", "--author-role", "reviewer",
    ).output.strip()
    return store_dir, tree, comment


def test_comment_respond_check_flow(runner, tmp_path, fixtures_dir):
    store_dir, _tree, comment = comment_flow(runner, tmp_path, fixtures_dir)
    response = run(
        runner, "--store", str(store_dir), "respond",
        "--to", comment, "--agreement", "agree", "--text", "Will fix.",
        "--author-name", "Ashe",
    ).output.strip()
    check = run(
        runner, "--store", str(store_dir), "check",
        "--to", response, "--status", "addressed", "--text", "Verified.",
        "--author-name", "Eddy",
    ).output.strip()
    store = GraphStore(store_dir, create=False)
    assert store.get_node(comment).kind.value == "reviewComment"
    assert store.get_node(response).payload["agreement"] == "agree"
    assert store.get_node(check).payload["isResponseTo"] == response


def test_export_import_isomorphism(runner, tmp_path, fixtures_dir):
    store_dir, _, _ = comment_flow(runner, tmp_path, fixtures_dir)
    turtle = run(runner, "--store", str(store_dir), "export", "--format", "turtle").output
    fresh_dir = tmp_path / "fresh"
    result = run(runner, "import", "--into", str(fresh_dir), input=turtle)
    summary = json.loads(result.output.splitlines()[-1])
    original = GraphStore(store_dir, create=False)
    fresh = GraphStore(fresh_dir, create=False)
    assert summary["imported"] == len(original)
    assert stores_isomorphic(original, fresh)


def test_sample_is_stable_and_matches_library(runner, tmp_path):
    titles = [f"Title number {i}" for i in range(40)]
    titles_file = tmp_path / "titles.txt"
    titles_file.write_text("\n".join(titles) + "\n", encoding="utf-8")
    first = run(runner, "sample", "--k", "7", "--input", str(titles_file)).output.splitlines()
    second = run(runner, "sample", "--k", "7", "--input", str(titles_file)).output.splitlines()
    assert first == second
    assert len(first) == 7
    assert first == sample_smallest_hash(titles, 7)


def test_analyze_baseline_table_output(runner):
    result = run(runner, "analyze", "baseline", "--dimension", "impact")
    assert "value: 0.5000" in result.output
    result = run(runner, "analyze", "baseline", "--dimension", "aspect")
    assert "value: 0.6667" in result.output


def test_analyze_json_equals_api_report(runner, tmp_path, fixtures_dir):
    store_dir, _, _ = comment_flow(runner, tmp_path, fixtures_dir)
    cli_out = run(
        runner, "--store", str(store_dir), "analyze", "distribution", "--out-format", "json-lines"
    ).output
    cli_report = json.loads(cli_out)

    store = GraphStore(store_dir, create=False)
    with TestClient(create_app(store)) as client:
        api_report = client.get("/api/analytics/distribution").json()
    assert cli_report == api_report

    cli_baseline = json.loads(
        run(runner, "analyze", "baseline", "--dimension", "polarity",
            "--out-format", "json-lines").output
    )
    with TestClient(create_app(store)) as client:
        api_baseline = client.get("/api/analytics/baseline", params={"dimension": "polarity"}).json()
    assert cli_baseline == api_baseline


def test_analyze_wilcoxon(runner):
    result = run(runner, "analyze", "wilcoxon", "--diffs", "1,2,3,4,5", "--out-format", "json-lines")
    report = json.loads(result.output)
    assert report["W"] == 15.0
    assert report["p"] == 0.0625
    assert report["method"] == "exact"


def test_sentiment_classify_inline(runner):
    result = run(runner, "sentiment", "classify", "--text", "not good", "--out-format", "json-lines")
    prediction = json.loads(result.output)
    assert prediction["label"] == "negative"


def test_cli_errors_render_problem_reports(runner, tmp_path, fixtures_dir):
    store_dir, _, _ = comment_flow(runner, tmp_path, fixtures_dir)
    result = runner.invoke(
        main,
        [
            "--store", str(store_dir), "comment",
            "--refers-to", "https://linkflows.example/snippets/ffffffffffffffff",
            "--text", "x", "--aspect", "content", "--polarity", "negative",
            "--action-needed", "suggestion", "--impact", "2",
            "--author-name", "R", "--author-role", "reviewer",
        ],
    )
    assert result.exit_code != 0


def test_missing_store_is_usage_error(runner):
    result = runner.invoke(main, ["export"], env={"LINKFLOWS_STORE": ""})
    assert result.exit_code != 0
