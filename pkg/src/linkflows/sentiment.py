"""Lexicon-based polarity classifier for review-comment text.

Valence terms, preceding-intensifier products, and shift-style negation (the
contribution moves a fixed amount toward the opposite sign rather than
flipping).  This is a baseline: it measures how the text is phrased, while
the polarity dimension records what kind of point the reviewer raises; the
two can legitimately differ, so every prediction carries that caveat.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from . import analytics
from .errors import AnalyticsError, LinkflowsError
from .model import Polarity

POLARITY_CAVEAT = (
    "lexicon score reflects phrasing, not the kind of point raised; "
    "treat as a baseline signal, not ground truth"
)

DEFAULT_EPSILON = 0.5
DEFAULT_NEGATION_SHIFT = 4.0

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_NEGATION_WINDOW = 3


class LexiconError(LinkflowsError):
    code = "bad-lexicon"


@dataclass
class Lexicon:
    """Valence terms on [-5, +5], multiplier intensifiers, and negator terms."""

    entries: dict[str, float]
    intensifiers: dict[str, float] = field(default_factory=dict)
    negators: set[str] = field(default_factory=set)
    negation_shift: float = DEFAULT_NEGATION_SHIFT

    def __post_init__(self) -> None:
        for term, valence in self.entries.items():
            if not -5 <= valence <= 5:
                raise LexiconError(f"valence for {term!r} outside [-5, 5]: {valence}")
        for term, mult in self.intensifiers.items():
            if mult <= 0:
                raise LexiconError(f"intensifier multiplier for {term!r} must be > 0: {mult}")

    @classmethod
    def from_text(cls, text: str) -> "Lexicon":
        """Parse the lexicon file format.

        Tab-separated `term<TAB>valence` lines; '#' starts a comment;
        `[intensifiers]` and `[negators]` headers switch sections.
        """
        entries: dict[str, float] = {}
        intensifiers: dict[str, float] = {}
        negators: set[str] = set()
        shift = DEFAULT_NEGATION_SHIFT
        section = "entries"
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower() == "[intensifiers]":
                section = "intensifiers"
                continue
            if line.lower() == "[negators]":
                section = "negators"
                continue
            if section == "negators":
                negators.add(line.lower())
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconError(f"line {lineno}: expected term<TAB>value, got {raw!r}")
            term, value = parts[0].strip().lower(), parts[1].strip()
            try:
                number = float(value)
            except ValueError:
                raise LexiconError(f"line {lineno}: bad number {value!r}") from None
            if section == "entries":
                entries[term] = number
            else:
                intensifiers[term] = number
        return cls(entries, intensifiers, negators, shift)

    @classmethod
    def from_file(cls, path: Path | str) -> "Lexicon":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def bundled_lexicon() -> Lexicon:
    """The ~200-term review-domain demonstration lexicon shipped as a fixture."""
    text = resources.files("linkflows").joinpath("data/review_lexicon.tsv").read_text("utf-8")
    return Lexicon.from_text(text)


@dataclass
class PolarityPrediction:
    item: Optional[str]
    raw_score: float
    label: Polarity
    evidence: list[tuple[str, float]]
    caveat: str = POLARITY_CAVEAT

    def to_dict(self) -> dict:
        return {
            "item": self.item,
            "rawScore": self.raw_score,
            "label": self.label.value,
            "evidence": [[term, score] for term, score in self.evidence],
            "caveat": self.caveat,
        }


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def classify(
    text: str,
    lexicon: Lexicon,
    epsilon: float = DEFAULT_EPSILON,
    item: Optional[str] = None,
) -> PolarityPrediction:
    """Score one text and band it into negative / neutral / positive.

    Each lexicon hit contributes its valence times the product of the run of
    intensifiers immediately before it; a negator within the three preceding
    tokens shifts the contribution toward the opposite sign by the lexicon's
    negation shift.  The raw score is the mean contribution over hits (0 with
    no hits); |raw| <= epsilon is the neutral band.
    """
    if not lexicon.entries:
        raise LexiconError("lexicon has no valence entries")
    tokens = tokenize(text)
    evidence: list[tuple[str, float]] = []
    for i, token in enumerate(tokens):
        if token not in lexicon.entries:
            continue
        contribution = lexicon.entries[token]
        j = i - 1
        while j >= 0 and tokens[j] in lexicon.intensifiers:
            contribution *= lexicon.intensifiers[tokens[j]]
            j -= 1
        window = tokens[max(0, i - _NEGATION_WINDOW) : i]
        if any(t in lexicon.negators for t in window):
            if contribution > 0:
                contribution -= lexicon.negation_shift
            elif contribution < 0:
                contribution += lexicon.negation_shift
        evidence.append((token, contribution))

    raw = sum(score for _, score in evidence) / len(evidence) if evidence else 0.0
    if raw < -epsilon:
        label = Polarity.NEGATIVE
    elif raw > epsilon:
        label = Polarity.POSITIVE
    else:
        label = Polarity.NEUTRAL
    return PolarityPrediction(item, raw, label, evidence)


def batch_classify(
    items: Sequence[tuple[Optional[str], str]],
    lexicon: Lexicon,
    epsilon: float = DEFAULT_EPSILON,
) -> list[PolarityPrediction]:
    """Element-wise classify, input order preserved."""
    return [classify(text, lexicon, epsilon, item=iri) for iri, text in items]


@dataclass
class EvaluationReport:
    accuracy: float
    labels: tuple[str, str, str]
    confusion: list[list[int]]  # rows: truth, columns: prediction
    n_items: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "labels": list(self.labels),
            "confusion": self.confusion,
            "nItems": self.n_items,
        }


def evaluate_against_ground_truth(
    predictions: Iterable[PolarityPrediction] | Mapping[str, str],
    ground_truth: Mapping[str, str],
) -> EvaluationReport:
    """Accuracy plus the 3x3 confusion matrix against polarity annotations."""
    if isinstance(predictions, Mapping):
        predicted = dict(predictions)
    else:
        predicted = {}
        for p in predictions:
            if p.item is None:
                raise AnalyticsError("missing-item", "predictions need item IRIs for evaluation")
            predicted[p.item] = p.label.value
    accuracy = analytics.classifier_accuracy(predicted, ground_truth)
    labels = tuple(p.value for p in Polarity)
    index = {label: i for i, label in enumerate(labels)}
    confusion = [[0, 0, 0] for _ in labels]
    for item in set(predicted) & set(ground_truth):
        confusion[index[ground_truth[item]]][index[predicted[item]]] += 1
    return EvaluationReport(accuracy, labels, confusion, sum(map(sum, confusion)))
