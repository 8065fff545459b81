"""Turning plain text into snippet trees and single-point review snippets.

Articles use a light markup convention: lines starting with '#' are section
headings, blank lines separate paragraph blocks.  Reviews split on blank
lines and on list-item markers, one snippet per point raised.  Sampling of
titles is the deterministic smallest-SHA-256 selection.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from datetime import datetime
from typing import Optional

from . import model, store as storemod
from .errors import EmptyInputError, KTooLargeError
from .model import GranularityLevel, SnippetNode
from .store import NodeKind, make_envelope

_HEADING_RE = re.compile(r"^#+\s*(.*)$")
_LIST_ITEM_RE = re.compile(r"^(\s*)(-|\*|\+|\d+\.)\s+")


def normalize_whitespace(text: str) -> str:
    """Canonical text form: LF endings, collapsed spaces/tabs, trimmed blocks.

    Blocks (blank-line separated) are joined with a single blank line, lines
    within a block with a single LF.  Reconstruction invariants are stated
    modulo this normalization.
    """
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    lines = [re.sub(r"[ \t]+", " ", line).strip() for line in text.split("\n")]
    blocks: list[str] = []
    current: list[str] = []
    for line in lines:
        if line:
            current.append(line)
        elif current:
            blocks.append("\n".join(current))
            current = []
    if current:
        blocks.append("\n".join(current))
    return "\n\n".join(blocks)


@dataclass
class SegmentationResult:
    root: SnippetNode
    sections: list[SnippetNode]
    paragraphs: list[SnippetNode]
    reconstruction_checksum: str  # SHA-256 of the normalized body text

    def all_nodes(self) -> list[SnippetNode]:
        """Every node in document order (article, then sections/paragraphs)."""
        ordered: list[SnippetNode] = [self.root]
        by_parent: dict[str, list[SnippetNode]] = {}
        for node in self.sections + self.paragraphs:
            by_parent.setdefault(node.parent or "", []).append(node)
        for kids in by_parent.values():
            kids.sort(key=lambda n: n.order)

        def walk(node: SnippetNode) -> None:
            for child in by_parent.get(node.id, []):
                ordered.append(child)
                walk(child)

        walk(self.root)
        return ordered

    def body_text(self) -> str:
        """Normalized concatenation of paragraph texts in document order."""
        paragraphs = [n for n in self.all_nodes() if n.level is GranularityLevel.PARAGRAPH]
        return "\n\n".join(normalize_whitespace(p.text) for p in paragraphs)


def segment_article(
    text: str,
    base_namespace: str = storemod.DEFAULT_BASE,
    created_at: Optional[datetime] = None,
) -> SegmentationResult:
    """Split article text into one article node, section nodes, paragraph nodes.

    IRIs are minted content-addressed up front (parents before children), so
    the same text always produces the same tree.
    """
    if not text or not normalize_whitespace(text):
        raise EmptyInputError("article text is empty")
    created = created_at or model.utc_now()

    def mint(level: GranularityLevel, body: str, parent: Optional[str], order: int) -> SnippetNode:
        payload = {"level": level.value, "text": body, "order": order}
        if parent is not None:
            payload["parent"] = parent
        env = make_envelope(NodeKind.SNIPPET, payload, base_namespace)
        return SnippetNode(
            id=env.id, level=level, text=body, parent=parent, order=order, created_at=created
        )

    root = mint(GranularityLevel.ARTICLE, "", None, 0)
    sections: list[SnippetNode] = []
    paragraphs: list[SnippetNode] = []
    current_parent = root.id
    sibling_order = {root.id: 0}

    block: list[str] = []

    def flush_block() -> None:
        nonlocal block
        body = "\n".join(block).strip()
        block = []
        if not body:
            return
        order = sibling_order[current_parent]
        sibling_order[current_parent] += 1
        paragraphs.append(mint(GranularityLevel.PARAGRAPH, body, current_parent, order))

    for raw_line in text.replace("\r\n", "\n").replace("\r", "\n").split("\n"):
        heading = _HEADING_RE.match(raw_line)
        if heading:
            flush_block()
            order = sibling_order[root.id]
            sibling_order[root.id] += 1
            section = mint(GranularityLevel.SECTION, heading.group(1).strip(), root.id, order)
            sections.append(section)
            current_parent = section.id
            sibling_order[section.id] = 0
        elif raw_line.strip():
            block.append(raw_line)
        else:
            flush_block()
    flush_block()

    body = "\n\n".join(normalize_whitespace(p.text) for p in paragraphs)
    checksum = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return SegmentationResult(root, sections, paragraphs, checksum)


def strip_headings(text: str) -> str:
    """The article body: heading lines blanked out (they separate blocks)."""
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    return "\n".join("" if _HEADING_RE.match(line) else line for line in lines)


@dataclass
class SuggestedTarget:
    level: GranularityLevel
    hint: str

    def to_dict(self) -> dict:
        return {"level": self.level.value, "hint": self.hint}


@dataclass
class ReviewSnippet:
    text: str
    index: int
    source_span: tuple[int, int]  # 1-based inclusive line numbers
    suggested_target: Optional[SuggestedTarget] = None

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "index": self.index,
            "sourceSpan": list(self.source_span),
            "suggestedTarget": self.suggested_target.to_dict() if self.suggested_target else None,
        }


_TARGET_HINTS: tuple[tuple[str, GranularityLevel], ...] = (
    (r"\bsections?\b", GranularityLevel.SECTION),
    (r"\bparagraphs?\b", GranularityLevel.PARAGRAPH),
    (r"\bfigures?\b", GranularityLevel.PARAGRAPH),
    (r"\btables?\b", GranularityLevel.PARAGRAPH),
    (r"\bsentences?\b", GranularityLevel.PARAGRAPH),
    (r"\bfootnotes?\b", GranularityLevel.PARAGRAPH),
    (r"\blistings?\b", GranularityLevel.PARAGRAPH),
    (r"\breferences?\b", GranularityLevel.PARAGRAPH),
    (r"\b(whole|entire)\s+(article|paper|manuscript)\b", GranularityLevel.ARTICLE),
    (r"\boverall\b", GranularityLevel.ARTICLE),
)


def suggest_target(text: str) -> Optional[SuggestedTarget]:
    """Keyword heuristic only; the authoritative link is set by a human."""
    lowered = text.lower()
    for pattern, level in _TARGET_HINTS:
        match = re.search(pattern, lowered)
        if match:
            return SuggestedTarget(level, match.group(0))
    return None


def split_review(text: str) -> list[ReviewSnippet]:
    """One snippet per point raised: split on blank lines and list-item markers.

    Markers are '-', '*', '+' or 'N.' at line start; continuation lines stay
    with their item.  Snippet spans are non-overlapping and ordered, and the
    sequence of non-blank normalized lines reconstructs the input.
    """
    if not text or not normalize_whitespace(text):
        raise EmptyInputError("review text is empty")
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")

    snippets: list[ReviewSnippet] = []
    current: list[str] = []
    start_line = 0

    def flush(end_line: int) -> None:
        nonlocal current
        body = "\n".join(current).strip()
        if body:
            snippets.append(
                ReviewSnippet(
                    text=body,
                    index=len(snippets),
                    source_span=(start_line, end_line),
                    suggested_target=suggest_target(body),
                )
            )
        current = []

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            flush(lineno - 1)
            continue
        if _LIST_ITEM_RE.match(line):
            flush(lineno - 1)
            start_line = lineno
            current = [line]
            continue
        if not current:
            start_line = lineno
        current.append(line)
    flush(len(lines))
    return snippets


def sample_smallest_hash(items: list[str], k: int) -> list[str]:
    """The k items whose SHA-256 hex digests sort smallest, in digest order.

    Digests are computed over each item's exact UTF-8 bytes (no case folding
    or trimming), so the selection is deterministic and independent of input
    order.
    """
    distinct = sorted(set(items))
    if k > len(distinct):
        raise KTooLargeError(f"k={k} exceeds {len(distinct)} distinct items")
    digests = [(hashlib.sha256(item.encode("utf-8")).hexdigest(), item) for item in distinct]
    digests.sort()
    return [item for _, item in digests[:k]]
