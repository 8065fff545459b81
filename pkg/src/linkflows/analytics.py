"""Agreement and disagreement statistics over annotation records.

Implements Fleiss' kappa, the RMS group-disagreement metric with analytic and
Monte-Carlo random baselines, the exact two-tailed Wilcoxon signed-rank test,
seeded subgroup (wisdom-of-crowd) analysis, and the descriptive reports
(granularity distribution, no-answer rates, classifier accuracy).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import AnalyticsError
from .model import GranularityLevel, SnippetNode
from .store import GraphStore, NodeKind

MORE_CONTEXT_NEEDED = "moreContextNeeded"
CONFUSING = "confusing"
CANNOT_ANSWER = (MORE_CONTEXT_NEEDED, CONFUSING)

GROUPS = ("reviewer", "modelExperts", "peers", "tool")


@dataclass(frozen=True)
class Dimension:
    """One classification dimension with its measurement scale.

    Ordinal dimensions carry equally spaced normalized values on [0, 1];
    nominal ones are compared category-by-category.
    """

    name: str
    kind: str  # "nominal" | "ordinal"
    categories: tuple[str, ...]
    values: Optional[tuple[float, ...]] = None

    def value_of(self, category: str) -> float:
        return self.values[self.categories.index(category)]


DIMENSIONS: dict[str, Dimension] = {
    "aspect": Dimension("aspect", "nominal", ("syntax", "style", "content")),
    "polarity": Dimension(
        "polarity", "ordinal", ("negative", "neutral", "positive"), (0.0, 0.5, 1.0)
    ),
    "actionNeeded": Dimension(
        "actionNeeded", "nominal", ("actionNeeded", "suggestion", "noActionNeeded")
    ),
    "impact": Dimension(
        "impact", "ordinal", ("1", "2", "3", "4", "5"), (0.0, 0.25, 0.5, 0.75, 1.0)
    ),
    "actionTaken": Dimension(
        "actionTaken", "nominal", ("addressed", "partiallyAddressed", "notAddressed")
    ),
}


def get_dimension(name: str) -> Dimension:
    try:
        return DIMENSIONS[name]
    except KeyError:
        raise AnalyticsError("unknown-dimension", f"no dimension named {name!r}") from None


@dataclass(frozen=True)
class AnnotationRecord:
    """One rater's answer for one item along one dimension.

    `answer` is either a category of the dimension or one of the
    cannot-answer markers (moreContextNeeded / confusing).
    """

    rater: str
    group: str
    item: str
    dimension: str
    answer: str

    @property
    def is_cannot_answer(self) -> bool:
        return self.answer in CANNOT_ANSWER

    def validate(self) -> None:
        dim = get_dimension(self.dimension)
        if self.group not in GROUPS:
            raise AnalyticsError("unknown-group", f"group must be one of {GROUPS}, got {self.group!r}")
        if not self.is_cannot_answer and self.answer not in dim.categories:
            raise AnalyticsError(
                "unknown-category",
                f"answer {self.answer!r} is not a {self.dimension} category",
            )


def parse_annotation_table(text: str) -> list[AnnotationRecord]:
    """Read the tab-separated annotation format.

    One record per line: rater, group, item IRI, dimension, answer.  A header
    line naming those five columns is required; '#' lines are comments.
    """
    records = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = line.rstrip("\n").split("\t")
        if len(cells) != 5:
            raise AnalyticsError(
                "bad-annotation-row", f"line {lineno}: expected 5 tab-separated cells, got {len(cells)}"
            )
        if not header_seen:
            if [c.strip() for c in cells] != ["rater", "group", "item", "dimension", "answer"]:
                raise AnalyticsError(
                    "bad-annotation-header",
                    f"line {lineno}: header must be rater/group/item/dimension/answer",
                )
            header_seen = True
            continue
        record = AnnotationRecord(*[c.strip() for c in cells])
        record.validate()
        records.append(record)
    return records


def format_annotation_table(records: Iterable[AnnotationRecord]) -> str:
    lines = ["rater\tgroup\titem\tdimension\tanswer"]
    for r in records:
        lines.append(f"{r.rater}\t{r.group}\t{r.item}\t{r.dimension}\t{r.answer}")
    return "\n".join(lines) + "\n"


def responses_by_item(
    records: Iterable[AnnotationRecord], dimension: str, group: Optional[str] = None
) -> dict[str, list[str]]:
    """Per-item answer multisets for one dimension, optionally one group."""
    out: dict[str, list[str]] = {}
    for r in records:
        if r.dimension != dimension:
            continue
        if group is not None and r.group != group:
            continue
        out.setdefault(r.item, []).append(r.answer)
    return out


# -- Fleiss' kappa ------------------------------------------------------------


@dataclass
class KappaReport:
    dimension: Optional[str]
    n_items: int
    n_raters_per_item: int
    p_bar_observed: float
    p_e_expected: float
    kappa: Optional[float]
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "nItems": self.n_items,
            "nRatersPerItem": self.n_raters_per_item,
            "PbarObserved": self.p_bar_observed,
            "PeExpected": self.p_e_expected,
            "kappa": self.kappa,
            "note": self.note,
        }


def fleiss_kappa(matrix: Sequence[Sequence[int]], dimension: Optional[str] = None) -> KappaReport:
    """Chance-corrected agreement for a fixed rater count per item.

    `matrix` holds per-item category counts (rows: items, columns:
    categories); every row must sum to the same rater count n >= 2.
    """
    counts = np.asarray(matrix, dtype=float)
    if counts.ndim != 2 or counts.shape[0] < 1:
        raise AnalyticsError("bad-matrix", "need a 2-D item x category count matrix with >= 1 item")
    row_sums = counts.sum(axis=1)
    n = row_sums[0]
    if not np.all(row_sums == n):
        raise AnalyticsError(
            "unequal-rater-counts", f"items have different rating counts: {sorted(set(row_sums))}"
        )
    if n < 2:
        raise AnalyticsError("unequal-rater-counts", "need at least 2 ratings per item")

    n_items = counts.shape[0]
    p_i = (np.sum(counts * counts, axis=1) - n) / (n * (n - 1))
    p_bar = float(np.mean(p_i))
    p_c = counts.sum(axis=0) / (n_items * n)
    p_e = float(np.sum(p_c * p_c))
    if p_e >= 1.0:
        return KappaReport(
            dimension, n_items, int(n), p_bar, p_e, None,
            note="degenerate: every rating fell in one category, kappa undefined",
        )
    kappa = (p_bar - p_e) / (1 - p_e)
    return KappaReport(dimension, n_items, int(n), p_bar, p_e, float(kappa))


def kappa_from_records(
    records: Iterable[AnnotationRecord],
    dimension: str,
    group: Optional[str] = None,
    restrict_to_complete: bool = False,
) -> KappaReport:
    """Build the count matrix for one dimension and run fleiss_kappa.

    Cannot-answer records are excluded first.  With restrict_to_complete,
    items that did not receive the modal rating count are dropped instead of
    failing the equal-rater-count precondition.
    """
    dim = get_dimension(dimension)
    substantive = [
        r for r in records
        if r.dimension == dimension and not r.is_cannot_answer and (group is None or r.group == group)
    ]
    by_item = responses_by_item(substantive, dimension, group)
    if not by_item:
        raise AnalyticsError("empty-overlap", f"no substantive answers for {dimension}")
    counts_per_item = {item: len(answers) for item, answers in by_item.items()}
    if restrict_to_complete:
        sizes = sorted(counts_per_item.values())
        modal = max(set(sizes), key=lambda s: (sizes.count(s), s))
        by_item = {i: a for i, a in by_item.items() if len(a) == modal}
    matrix = []
    for item in sorted(by_item):
        row = [by_item[item].count(c) for c in dim.categories]
        matrix.append(row)
    return fleiss_kappa(matrix, dimension)


# -- group disagreement -------------------------------------------------------


@dataclass
class DisagreementReport:
    dimension: str
    group_a: str
    group_b: str
    items: list[str]
    score: float
    excluded_cannot_answer: int

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "groupA": self.group_a,
            "groupB": self.group_b,
            "nItems": len(self.items),
            "items": self.items,
            "score": self.score,
            "excludedCannotAnswer": self.excluded_cannot_answer,
        }


def _substantive(responses: Mapping[str, Sequence[str]]) -> tuple[dict[str, list[str]], int]:
    kept: dict[str, list[str]] = {}
    excluded = 0
    for item, answers in responses.items():
        good = [a for a in answers if a not in CANNOT_ANSWER]
        excluded += len(answers) - len(good)
        if good:
            kept[item] = good
    return kept, excluded


def disagreement_score(
    responses_a: Mapping[str, Sequence[str]],
    responses_b: Mapping[str, Sequence[str]],
    dimension: str,
    group_a: str = "A",
    group_b: str = "B",
) -> DisagreementReport:
    """Root-mean-square difference between two groups' per-item averages.

    Ordinal dimensions compare within-group means of the normalized answers;
    nominal dimensions compare within-group category ratios, averaging the
    squared differences over every (item, category) cell before the root.
    Cannot-answer responses are excluded and counted.  Score is in [0, 1].
    """
    dim = get_dimension(dimension)
    clean_a, excl_a = _substantive(responses_a)
    clean_b, excl_b = _substantive(responses_b)
    items = sorted(set(clean_a) & set(clean_b))
    if not items:
        raise AnalyticsError("empty-overlap", "the two groups share no answered items")

    for item in items:
        for answers in (clean_a[item], clean_b[item]):
            for a in answers:
                if a not in dim.categories:
                    raise AnalyticsError(
                        "unknown-category", f"answer {a!r} is not a {dimension} category"
                    )

    if dim.kind == "ordinal":
        sq_sum = 0.0
        for item in items:
            mean_a = sum(dim.value_of(a) for a in clean_a[item]) / len(clean_a[item])
            mean_b = sum(dim.value_of(a) for a in clean_b[item]) / len(clean_b[item])
            sq_sum += (mean_a - mean_b) ** 2
        score = math.sqrt(sq_sum / len(items))
    else:
        sq_sum = 0.0
        cells = 0
        for item in items:
            for cat in dim.categories:
                ratio_a = clean_a[item].count(cat) / len(clean_a[item])
                ratio_b = clean_b[item].count(cat) / len(clean_b[item])
                sq_sum += (ratio_a - ratio_b) ** 2
                cells += 1
        score = math.sqrt(sq_sum / cells)

    return DisagreementReport(dimension, group_a, group_b, items, score, excl_a + excl_b)


def random_baseline(
    dimension: str,
    mode: str = "analytic",
    trials: Optional[int] = None,
    seed: Optional[int] = None,
) -> float:
    """Expected disagreement between two uniform, uncorrelated single raters.

    Analytic closed forms: nominal with k categories sqrt(2(k-1))/k; ordinal
    with m equally spaced levels sqrt((m+1)/(6(m-1))).  Monte Carlo simulates
    the same two-rater model and converges to the analytic value.
    """
    dim = get_dimension(dimension)
    k = len(dim.categories)
    if mode == "analytic":
        if dim.kind == "nominal":
            return math.sqrt(2 * (k - 1)) / k
        return math.sqrt((k + 1) / (6 * (k - 1)))
    if mode in ("monteCarlo", "monte-carlo"):
        if trials is None or trials < 1:
            raise AnalyticsError("invalid-trials", "monte-carlo mode needs trials >= 1")
        rng = np.random.default_rng(seed)
        a = rng.integers(0, k, size=trials)
        b = rng.integers(0, k, size=trials)
        if dim.kind == "nominal":
            msd = np.mean((a != b) * (2.0 / k))
        else:
            values = np.asarray(dim.values)
            msd = np.mean((values[a] - values[b]) ** 2)
        return float(math.sqrt(msd))
    raise AnalyticsError("invalid-mode", f"unknown baseline mode {mode!r}")


# -- Wilcoxon signed-rank -----------------------------------------------------


@dataclass
class WilcoxonResult:
    w: float
    p: float
    method: str  # "exact" | "normal-approx"
    n_nonzero: int

    def to_dict(self) -> dict:
        return {"W": self.w, "p": self.p, "method": self.method, "nNonzero": self.n_nonzero}


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2  # 1-based rank positions i+1 .. j+1
        for idx in order[i : j + 1]:
            ranks[idx] = avg
        i = j + 1
    return ranks


def _exact_two_tailed_p(ranks: Sequence[float], w_obs: float) -> float:
    """Distribution of W over all 2^n sign assignments, via subset-sum counts.

    Ranks are multiples of 0.5 (average ranks), so doubling makes them
    integers and the distribution fits in an integer-count array.
    """
    scaled = [int(round(2 * r)) for r in ranks]
    total = sum(scaled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r2 in scaled:
        nxt = counts[:]
        for s in range(total - r2 + 1):
            if counts[s]:
                nxt[s + r2] += counts[s]
        counts = nxt
    mu2 = total / 2  # distribution center in scaled units
    dev_obs = abs(2 * w_obs - mu2)
    hits = sum(c for s, c in enumerate(counts) if abs(s - mu2) >= dev_obs - 1e-9)
    return hits / (2 ** len(ranks))


def wilcoxon_signed_rank(differences: Sequence[float], exact_limit: int = 20) -> WilcoxonResult:
    """Two-tailed Wilcoxon signed-rank test on paired differences.

    Zero differences are dropped (Wilcoxon's original rule); tied magnitudes
    get average ranks; W is the positive-rank sum.  Exact enumeration over
    all sign assignments up to `exact_limit` nonzero differences, a
    tie-corrected normal approximation with continuity correction above.
    """
    nonzero = [d for d in differences if d != 0]
    if not nonzero:
        raise AnalyticsError(
            "all-zero-differences", "every difference is zero; the test is undefined"
        )
    magnitudes = [abs(d) for d in nonzero]
    ranks = _average_ranks(magnitudes)
    w = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    n = len(nonzero)

    if n <= exact_limit:
        p = _exact_two_tailed_p(ranks, w)
        return WilcoxonResult(w, min(p, 1.0), "exact", n)

    # Moments of W under random signs come straight from the (average) ranks,
    # which makes the variance tie-corrected automatically; the fourth-cumulant
    # Edgeworth term plus continuity correction sharpens the tails.
    mu = sum(ranks) / 2
    var = sum(r * r for r in ranks) / 4
    if var <= 0:
        return WilcoxonResult(w, 1.0, "normal-approx", n)
    kurt4 = -sum(r**4 for r in ranks) / 8
    gamma2 = kurt4 / (var * var)
    z = max(abs(w - mu) - 0.5, 0.0) / math.sqrt(var)
    tail = 0.5 * math.erfc(z / math.sqrt(2))
    density = math.exp(-z * z / 2) / math.sqrt(2 * math.pi)
    p = 2 * (tail + density * gamma2 / 24 * (z**3 - 3 * z))
    return WilcoxonResult(w, min(max(p, 1e-300), 1.0), "normal-approx", n)


# -- subgroup (wisdom-of-crowd) analysis --------------------------------------


@dataclass
class SubgroupReport:
    dimension: str
    group_size: int
    partition_seed: int
    n_groups: int
    dropped_raters: list[str]
    mean_score: float
    std_dev: float
    groups: list[DisagreementReport]

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "groupSize": self.group_size,
            "partitionSeed": self.partition_seed,
            "nGroups": self.n_groups,
            "droppedRaters": self.dropped_raters,
            "meanScore": self.mean_score,
            "stdDev": self.std_dev,
            "groups": [g.to_dict() for g in self.groups],
        }


def subgroup_analysis(
    peer_records: Iterable[AnnotationRecord],
    reference: Mapping[str, Sequence[str]],
    dimension: str,
    group_size: int,
    partition_seed: int = 0,
) -> SubgroupReport:
    """Partition peers into seeded disjoint groups and score each against a reference.

    Raters are shuffled with the given seed, cut into floor(n/size) groups,
    and any remainder is dropped (and reported).  Mean and population
    standard deviation summarize the per-group disagreement scores.
    """
    records = [r for r in peer_records if r.dimension == dimension]
    raters = sorted({r.rater for r in records})
    if group_size < 1:
        raise AnalyticsError("too-few-raters", "group size must be >= 1")
    if len(raters) < group_size:
        raise AnalyticsError(
            "too-few-raters", f"{len(raters)} raters cannot form a group of {group_size}"
        )
    shuffled = raters[:]
    random.Random(partition_seed).shuffle(shuffled)
    n_groups = len(shuffled) // group_size
    dropped = sorted(shuffled[n_groups * group_size :])

    reports = []
    for g in range(n_groups):
        members = set(shuffled[g * group_size : (g + 1) * group_size])
        group_records = [r for r in records if r.rater in members]
        responses: dict[str, list[str]] = {}
        for r in group_records:
            responses.setdefault(r.item, []).append(r.answer)
        reports.append(
            disagreement_score(responses, reference, dimension, f"peers[{g}]", "reference")
        )
    scores = np.array([r.score for r in reports])
    return SubgroupReport(
        dimension,
        group_size,
        partition_seed,
        n_groups,
        dropped,
        float(np.mean(scores)),
        float(np.std(scores)),  # population standard deviation
        reports,
    )


# -- descriptive reports ------------------------------------------------------


@dataclass
class DistributionReport:
    n_comments: int
    granularity_counts: dict[str, int]
    granularity_percent: dict[str, float]
    category_counts: dict[str, dict[str, int]]
    category_percent: dict[str, dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "nComments": self.n_comments,
            "granularityCounts": self.granularity_counts,
            "granularityPercent": self.granularity_percent,
            "categoryCounts": self.category_counts,
            "categoryPercent": self.category_percent,
        }


def distribution_report(store: GraphStore) -> DistributionReport:
    """Share of review comments per target granularity, plus per-dimension counts."""
    comments = [env.record() for env in store.query(kind=NodeKind.REVIEW_COMMENT)]
    if not comments:
        raise AnalyticsError("empty-store", "no review comments in the store")

    level_counts = {level.value: 0 for level in GranularityLevel}
    for c in comments:
        target = store.get_record(c.refers_to)
        if isinstance(target, SnippetNode):
            level_counts[target.level.value] += 1
        else:
            raise AnalyticsError(
                "bad-target", f"comment {c.id} targets a non-snippet node {c.refers_to}"
            )
    n = len(comments)
    level_pct = {lvl: 100.0 * cnt / n for lvl, cnt in level_counts.items()}

    cat_counts: dict[str, dict[str, int]] = {}
    cat_pct: dict[str, dict[str, float]] = {}
    selectors = {
        "aspect": lambda c: c.aspect.value,
        "polarity": lambda c: c.polarity.value,
        "actionNeeded": lambda c: c.action_needed.value,
        "impact": lambda c: str(c.impact.value),
    }
    for name, pick in selectors.items():
        dim = DIMENSIONS[name]
        counts = {cat: 0 for cat in dim.categories}
        for c in comments:
            counts[pick(c)] += 1
        cat_counts[name] = counts
        cat_pct[name] = {cat: 100.0 * v / n for cat, v in counts.items()}

    return DistributionReport(n, level_counts, level_pct, cat_counts, cat_pct)


@dataclass
class NoAnswerReport:
    per_dimension: dict[str, dict[str, float]]  # dimension -> {moreContextNeeded, confusing, total, nRecords}
    overall: dict[str, float]

    def to_dict(self) -> dict:
        return {"perDimension": self.per_dimension, "overall": self.overall}


def no_answer_report(records: Iterable[AnnotationRecord]) -> NoAnswerReport:
    """Percentage of cannot-answer responses per dimension, reason, and overall."""
    records = list(records)
    per_dim: dict[str, dict[str, float]] = {}
    for name in DIMENSIONS:
        dim_records = [r for r in records if r.dimension == name]
        total = len(dim_records)
        more = sum(1 for r in dim_records if r.answer == MORE_CONTEXT_NEEDED)
        confusing = sum(1 for r in dim_records if r.answer == CONFUSING)
        per_dim[name] = {
            "nRecords": total,
            "moreContextNeeded": 100.0 * more / total if total else 0.0,
            "confusing": 100.0 * confusing / total if total else 0.0,
            "total": 100.0 * (more + confusing) / total if total else 0.0,
        }
    n_all = len(records)
    more_all = sum(1 for r in records if r.answer == MORE_CONTEXT_NEEDED)
    conf_all = sum(1 for r in records if r.answer == CONFUSING)
    overall = {
        "nRecords": n_all,
        "moreContextNeeded": 100.0 * more_all / n_all if n_all else 0.0,
        "confusing": 100.0 * conf_all / n_all if n_all else 0.0,
        "total": 100.0 * (more_all + conf_all) / n_all if n_all else 0.0,
    }
    return NoAnswerReport(per_dim, overall)


def classifier_accuracy(
    predictions: Mapping[str, str], ground_truth: Mapping[str, str]
) -> float:
    """Ratio of correctly classified instances over the shared item set."""
    shared = set(predictions) & set(ground_truth)
    if not shared:
        raise AnalyticsError("empty-overlap", "predictions and ground truth share no items")
    correct = sum(1 for item in shared if predictions[item] == ground_truth[item])
    return correct / len(shared)
