from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from linkflows.model import (
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
)
from linkflows.store import GraphStore

FIXTURES = Path(__file__).parent / "fixtures"

T0 = datetime(2026, 1, 5, 12, 0, 0, tzinfo=timezone.utc)


def ts(seconds: int) -> datetime:
    return T0 + timedelta(seconds=seconds)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def empty_store(tmp_path) -> GraphStore:
    return GraphStore(tmp_path / "store")


@pytest.fixture
def seeded_store(tmp_path) -> GraphStore:
    """A small store: one article tree, one agent per role, a few comments."""
    store = GraphStore(tmp_path / "store")
    reviewer = store.add_record(Agent("x", "Rivka", Role.REVIEWER))
    author = store.add_record(Agent("x", "Ashe", Role.AUTHOR))
    editor = store.add_record(Agent("x", "Eddy", Role.EDITOR))

    article = SnippetNode("x", GranularityLevel.ARTICLE, "", created_at=ts(0))
    article_id = store.add_record(article)
    section = SnippetNode("x", GranularityLevel.SECTION, "Methods", parent=article_id, order=0, created_at=ts(1))
    section_id = store.add_record(section)
    paragraphs = []
    for i, body in enumerate(["First paragraph.", "Second paragraph.", "Third paragraph."]):
        node = SnippetNode("x", GranularityLevel.PARAGRAPH, body, parent=section_id, order=i, created_at=ts(2 + i))
        paragraphs.append(store.add_record(node))

    def comment(target, text, aspect, polarity, action, impact, when):
        return store.add_record(
            ReviewComment(
                "x", target, text, reviewer,
                aspect, polarity, action, ImpactScore(impact), created_at=ts(when),
            )
        )

    c1 = comment(paragraphs[0], "Unclear definition here.", Aspect.CONTENT, Polarity.NEGATIVE,
                 ActionNeeded.ACTION_NEEDED, 4, 10)
    c2 = comment(paragraphs[0], "Nice phrasing.", Aspect.STYLE, Polarity.POSITIVE,
                 ActionNeeded.NO_ACTION_NEEDED, 2, 11)
    c3 = comment(paragraphs[1], "Missing citation.", Aspect.CONTENT, Polarity.NEGATIVE,
                 ActionNeeded.ACTION_NEEDED, 3, 12)
    c4 = comment(section_id, "Section ordering is odd.", Aspect.STYLE, Polarity.NEGATIVE,
                 ActionNeeded.SUGGESTION, 2, 13)
    c5 = comment(article_id, "Solid contribution overall.", Aspect.CONTENT, Polarity.POSITIVE,
                 ActionNeeded.NO_ACTION_NEEDED, 5, 14)

    response = store.add_record(
        ResponseComment("x", c1, author, "Agreed, will clarify.", Agreement.AGREE, created_at=ts(20))
    )
    store.add_record(
        ActionCheckComment("x", response, editor, "Fixed in v2.", CheckStatus.ADDRESSED, created_at=ts(30))
    )

    store.test_ids = {  # type: ignore[attr-defined]
        "reviewer": reviewer, "author": author, "editor": editor,
        "article": article_id, "section": section_id, "paragraphs": paragraphs,
        "comments": [c1, c2, c3, c4, c5], "response": response,
    }
    return store
