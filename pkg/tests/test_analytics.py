from __future__ import annotations

import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkflows.analytics import (
    DIMENSIONS,
    AnnotationRecord,
    classifier_accuracy,
    disagreement_score,
    fleiss_kappa,
    format_annotation_table,
    kappa_from_records,
    no_answer_report,
    parse_annotation_table,
    random_baseline,
    responses_by_item,
    subgroup_analysis,
    wilcoxon_signed_rank,
    _average_ranks,
)
from linkflows.errors import AnalyticsError


# -- Fleiss' kappa ------------------------------------------------------------

def test_perfect_agreement_is_exactly_one():
    # unanimous per item, categories vary across items
    report = fleiss_kappa([[3, 0], [0, 3]])
    assert report.kappa == 1.0


def test_two_item_three_rater_fixture():
    # hand evaluation: P_bar = 1/3, P_e = 1/2, kappa = -1/3
    report = fleiss_kappa([[2, 1], [1, 2]])
    assert report.p_bar_observed == pytest.approx(1 / 3, abs=1e-12)
    assert report.p_e_expected == pytest.approx(1 / 2, abs=1e-12)
    assert report.kappa == pytest.approx(-1 / 3, abs=1e-9)


def kappa_pair_oracle(matrix):
    """Recompute kappa by counting agreeing rater pairs directly."""
    n = sum(matrix[0])
    agree_fractions = []
    for row in matrix:
        raters = []
        for cat, count in enumerate(row):
            raters.extend([cat] * count)
        pairs = list(itertools.combinations(range(n), 2))
        agreeing = sum(1 for i, j in pairs if raters[i] == raters[j])
        agree_fractions.append(agreeing / len(pairs))
    p_bar = sum(agree_fractions) / len(agree_fractions)
    totals = [sum(row[c] for row in matrix) for c in range(len(matrix[0]))]
    grand = sum(totals)
    p_e = sum((t / grand) ** 2 for t in totals)
    return (p_bar - p_e) / (1 - p_e)


def test_kappa_matches_pair_counting_oracle():
    rng = random.Random(123)
    for _ in range(100):
        n_items = rng.randint(1, 12)
        n_cats = rng.randint(2, 5)
        n_raters = rng.randint(2, 8)
        matrix = []
        for _ in range(n_items):
            row = [0] * n_cats
            for _ in range(n_raters):
                row[rng.randrange(n_cats)] += 1
            matrix.append(row)
        totals = [sum(row[c] for row in matrix) for c in range(n_cats)]
        if max(totals) == n_items * n_raters:
            continue  # degenerate: single category everywhere
        report = fleiss_kappa(matrix)
        assert report.kappa == pytest.approx(kappa_pair_oracle(matrix), abs=1e-9)


def test_unequal_rater_counts_rejected():
    with pytest.raises(AnalyticsError) as excinfo:
        fleiss_kappa([[2, 1], [1, 1]])
    assert excinfo.value.code == "unequal-rater-counts"


def test_degenerate_single_category_reports_undefined():
    report = fleiss_kappa([[3, 0], [3, 0]])
    assert report.kappa is None
    assert "degenerate" in report.note


def test_kappa_from_records_excludes_cannot_answer():
    records = [
        AnnotationRecord("r1", "peers", "i1", "aspect", "syntax"),
        AnnotationRecord("r2", "peers", "i1", "aspect", "syntax"),
        AnnotationRecord("r3", "peers", "i1", "aspect", "moreContextNeeded"),
        AnnotationRecord("r1", "peers", "i2", "aspect", "style"),
        AnnotationRecord("r2", "peers", "i2", "aspect", "style"),
    ]
    report = kappa_from_records(records, "aspect")
    assert report.n_items == 2
    assert report.n_raters_per_item == 2
    assert report.kappa == 1.0


# -- disagreement scores ------------------------------------------------------

def test_identical_responses_score_zero():
    responses = {"t1": ["syntax", "style"], "t2": ["content"]}
    report = disagreement_score(responses, responses, "aspect")
    assert report.score == 0.0


def test_single_item_nominal_hand_case():
    report = disagreement_score({"t": ["syntax"]}, {"t": ["style"]}, "aspect")
    assert report.score == pytest.approx(math.sqrt(2 / 3), abs=1e-9)


def test_single_item_impact_extremes():
    report = disagreement_score({"t": ["5"]}, {"t": ["1"]}, "impact")
    assert report.score == 1.0


def test_cannot_answer_excluded_and_counted():
    a = {"t": ["syntax", "moreContextNeeded"], "u": ["confusing"]}
    b = {"t": ["syntax"], "u": ["style"]}
    report = disagreement_score(a, b, "aspect")
    assert report.items == ["t"]  # u lost its only substantive answer in a
    assert report.excluded_cannot_answer == 2
    assert report.score == 0.0


def test_empty_overlap_rejected():
    with pytest.raises(AnalyticsError) as excinfo:
        disagreement_score({"t1": ["syntax"]}, {"t2": ["style"]}, "aspect")
    assert excinfo.value.code == "empty-overlap"


def test_unknown_dimension_rejected():
    with pytest.raises(AnalyticsError):
        disagreement_score({"t": ["x"]}, {"t": ["x"]}, "sentiments")


def _random_responses(rng, dim, items, max_raters=4):
    return {
        item: [rng.choice(dim.categories) for _ in range(rng.randint(1, max_raters))]
        for item in items
    }


@pytest.mark.parametrize("dimension", list(DIMENSIONS))
def test_symmetry_bounds_and_self_zero(dimension):
    rng = random.Random(hash(dimension) % 2**32)
    dim = DIMENSIONS[dimension]
    for _ in range(50):
        items = [f"i{k}" for k in range(rng.randint(1, 6))]
        a = _random_responses(rng, dim, items)
        b = _random_responses(rng, dim, items)
        ab = disagreement_score(a, b, dimension)
        ba = disagreement_score(b, a, dimension)
        aa = disagreement_score(a, a, dimension)
        assert ab.score == pytest.approx(ba.score, abs=1e-12)
        assert aa.score == 0.0
        assert 0.0 <= ab.score <= 1.0


# -- random baselines ---------------------------------------------------------

def test_analytic_baselines_match_closed_forms():
    assert random_baseline("aspect") == pytest.approx(2 / 3, abs=1e-12)
    assert random_baseline("actionNeeded") == pytest.approx(2 / 3, abs=1e-12)
    assert random_baseline("actionTaken") == pytest.approx(2 / 3, abs=1e-12)
    assert random_baseline("polarity") == pytest.approx(math.sqrt(1 / 3), abs=1e-12)
    assert round(random_baseline("polarity"), 4) == 0.5774
    assert random_baseline("impact") == pytest.approx(0.5, abs=1e-12)


def test_monte_carlo_converges_to_analytic():
    for dimension in DIMENSIONS:
        analytic = random_baseline(dimension)
        simulated = random_baseline(dimension, "monteCarlo", trials=100_000, seed=11)
        assert simulated == pytest.approx(analytic, abs=0.01)


def test_monte_carlo_is_seed_deterministic():
    a = random_baseline("impact", "monteCarlo", trials=1000, seed=5)
    b = random_baseline("impact", "monteCarlo", trials=1000, seed=5)
    assert a == b


def test_invalid_trials_rejected():
    with pytest.raises(AnalyticsError) as excinfo:
        random_baseline("aspect", "monteCarlo", trials=0)
    assert excinfo.value.code == "invalid-trials"


# -- Wilcoxon signed-rank -----------------------------------------------------

def wilcoxon_enumeration_oracle(diffs):
    """Literal enumeration over all 2^n sign patterns."""
    d = [x for x in diffs if x != 0]
    ranks = _average_ranks([abs(x) for x in d])
    mu = sum(ranks) / 2
    w_obs = sum(r for r, x in zip(ranks, d) if x > 0)
    dev = abs(w_obs - mu)
    hits = sum(
        1
        for signs in itertools.product((0, 1), repeat=len(d))
        if abs(sum(r for r, s in zip(ranks, signs) if s) - mu) >= dev - 1e-9
    )
    return w_obs, hits / 2 ** len(d)


def test_five_positive_distinct_differences():
    result = wilcoxon_signed_rank([1.0, 2.0, 3.0, 4.0, 5.0])
    assert result.w == 15.0
    assert result.p == 0.0625
    assert result.method == "exact"


def test_statistic_at_null_center_gives_p_one():
    result = wilcoxon_signed_rank([2.0, -2.0])
    assert result.p == 1.0


def test_zeros_are_dropped():
    with_zeros = wilcoxon_signed_rank([0.0, 1.0, 0.0, -2.0, 3.0])
    without = wilcoxon_signed_rank([1.0, -2.0, 3.0])
    assert with_zeros.w == without.w and with_zeros.p == without.p
    assert with_zeros.n_nonzero == 3


def test_all_zero_differences_rejected():
    with pytest.raises(AnalyticsError) as excinfo:
        wilcoxon_signed_rank([0.0, 0.0])
    assert excinfo.value.code == "all-zero-differences"


def test_exact_path_matches_enumeration_oracle():
    rng = random.Random(99)
    for _ in range(60):
        n = rng.randint(1, 12)
        diffs = [rng.choice([-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0]) for _ in range(n)]
        if all(d == 0 for d in diffs):
            continue
        result = wilcoxon_signed_rank(diffs)
        w_oracle, p_oracle = wilcoxon_enumeration_oracle(diffs)
        assert result.w == pytest.approx(w_oracle, abs=1e-12)
        assert result.p == pytest.approx(p_oracle, abs=1e-12)


def test_exact_and_approx_agree_at_n15():
    rng = random.Random(2026)
    for _ in range(50):
        diffs = [rng.gauss(0.4, 1.0) for _ in range(15)]
        exact = wilcoxon_signed_rank(diffs)
        approx = wilcoxon_signed_rank(diffs, exact_limit=10)
        assert exact.method == "exact" and approx.method == "normal-approx"
        assert abs(exact.p - approx.p) < 0.01


# -- subgroup analysis --------------------------------------------------------

def _peer_records(n_raters, items, dimension, answer_fn):
    records = []
    for r in range(n_raters):
        for item in items:
            records.append(
                AnnotationRecord(f"p{r:02d}", "peers", item, dimension, answer_fn(r, item))
            )
    return records


def test_single_group_equals_whole_group_score():
    rng = random.Random(4)
    items = ["i1", "i2", "i3"]
    records = _peer_records(5, items, "aspect", lambda r, i: rng.choice(("syntax", "style", "content")))
    reference = {i: ["content"] for i in items}
    report = subgroup_analysis(records, reference, "aspect", group_size=5, partition_seed=3)
    whole = disagreement_score(responses_by_item(records, "aspect"), reference, "aspect")
    assert report.n_groups == 1
    assert report.mean_score == pytest.approx(whole.score, abs=1e-12)
    assert report.std_dev == 0.0


def test_identical_peers_have_zero_spread():
    items = ["i1", "i2"]
    records = _peer_records(9, items, "polarity", lambda r, i: "negative")
    reference = {i: ["positive"] for i in items}
    report = subgroup_analysis(records, reference, "polarity", group_size=3, partition_seed=0)
    assert report.n_groups == 3
    assert report.std_dev == 0.0
    assert all(g.score == 1.0 for g in report.groups)


def test_twelve_peers_groups_of_three_matches_direct_recomputation():
    rng = random.Random(8)
    items = [f"i{k}" for k in range(5)]
    cats = ("1", "2", "3", "4", "5")
    records = _peer_records(12, items, "impact", lambda r, i: rng.choice(cats))
    reference = {i: [rng.choice(cats)] for i in items}
    report = subgroup_analysis(records, reference, "impact", group_size=3, partition_seed=7)
    assert report.n_groups == 4

    # recompute each group score independently from the partition implied by the seed
    raters = sorted({r.rater for r in records})
    shuffled = raters[:]
    random.Random(7).shuffle(shuffled)
    direct = []
    for g in range(4):
        members = set(shuffled[g * 3 : (g + 1) * 3])
        responses = responses_by_item([r for r in records if r.rater in members], "impact")
        direct.append(disagreement_score(responses, reference, "impact").score)
    assert report.mean_score == pytest.approx(sum(direct) / 4, abs=1e-12)
    assert report.std_dev == pytest.approx(float(np.std(direct)), abs=1e-12)
    assert [g.score for g in report.groups] == pytest.approx(direct)


def test_remainder_raters_dropped_and_reported():
    items = ["i1"]
    records = _peer_records(7, items, "aspect", lambda r, i: "syntax")
    reference = {"i1": ["syntax"]}
    report = subgroup_analysis(records, reference, "aspect", group_size=3, partition_seed=1)
    assert report.n_groups == 2
    assert len(report.dropped_raters) == 1


def test_too_few_raters_rejected():
    records = _peer_records(2, ["i1"], "aspect", lambda r, i: "syntax")
    with pytest.raises(AnalyticsError):
        subgroup_analysis(records, {"i1": ["syntax"]}, "aspect", group_size=3)


# -- descriptive reports ------------------------------------------------------

def test_distribution_on_seeded_store(seeded_store):
    from linkflows.analytics import distribution_report

    report = distribution_report(seeded_store)
    assert report.n_comments == 5
    assert report.granularity_counts == {"article": 1, "section": 1, "paragraph": 3}
    assert report.granularity_percent["paragraph"] == pytest.approx(60.0)
    assert sum(report.granularity_percent.values()) == pytest.approx(100.0)
    assert report.category_counts["aspect"]["content"] == 3
    assert sum(report.category_percent["impact"].values()) == pytest.approx(100.0)


def test_distribution_empty_store(empty_store):
    from linkflows.analytics import distribution_report

    with pytest.raises(AnalyticsError) as excinfo:
        distribution_report(empty_store)
    assert excinfo.value.code == "empty-store"


def test_no_answer_all_zeros():
    records = [AnnotationRecord("r", "peers", "i", "aspect", "syntax")]
    report = no_answer_report(records)
    assert report.overall["total"] == 0.0
    assert all(v["total"] == 0.0 for v in report.per_dimension.values())


def test_no_answer_one_in_ten():
    records = [
        AnnotationRecord(f"r{i}", "peers", f"i{i}", "impact", "3") for i in range(9)
    ] + [AnnotationRecord("r9", "peers", "i9", "impact", "moreContextNeeded")]
    report = no_answer_report(records)
    assert report.per_dimension["impact"]["moreContextNeeded"] == pytest.approx(10.0)
    assert report.per_dimension["impact"]["total"] == pytest.approx(10.0)
    assert report.overall["total"] == pytest.approx(10.0)


def test_no_answer_mixed_reasons_and_overall():
    records = (
        [AnnotationRecord(f"r{i}", "peers", "i", "aspect", "syntax") for i in range(8)]
        + [AnnotationRecord("r8", "peers", "i", "aspect", "confusing")]
        + [AnnotationRecord("r9", "peers", "i", "aspect", "moreContextNeeded")]
        + [AnnotationRecord(f"q{i}", "peers", "i", "impact", "2") for i in range(10)]
    )
    report = no_answer_report(records)
    assert report.per_dimension["aspect"]["confusing"] == pytest.approx(10.0)
    assert report.per_dimension["aspect"]["moreContextNeeded"] == pytest.approx(10.0)
    assert report.per_dimension["aspect"]["total"] == pytest.approx(20.0)
    assert report.per_dimension["impact"]["total"] == 0.0
    assert report.overall["total"] == pytest.approx(10.0)  # 2 of 20


# -- classifier accuracy ------------------------------------------------------

def test_accuracy_perfect_and_half():
    truth = {"a": "negative", "b": "positive"}
    assert classifier_accuracy(truth, truth) == 1.0
    assert classifier_accuracy({"a": "negative", "b": "negative"}, truth) == 0.5


def test_accuracy_eight_of_eleven():
    truth = {f"i{k}": "negative" for k in range(11)}
    predictions = {f"i{k}": ("negative" if k < 8 else "positive") for k in range(11)}
    value = classifier_accuracy(predictions, truth)
    assert value == pytest.approx(8 / 11, abs=1e-12)
    assert round(value, 4) == 0.7273


@given(st.dictionaries(st.text(min_size=1, max_size=6), st.sampled_from(["x", "y", "z"]), min_size=1, max_size=20))
@settings(max_examples=30)
def test_accuracy_invariant_under_relabeling(truth):
    rng = random.Random(0)
    predictions = {k: rng.choice(["x", "y", "z"]) for k in truth}
    base = classifier_accuracy(predictions, truth)
    renamed_truth = {f"item::{k}": v for k, v in truth.items()}
    renamed_pred = {f"item::{k}": v for k, v in predictions.items()}
    assert classifier_accuracy(renamed_pred, renamed_truth) == base


def test_accuracy_empty_overlap():
    with pytest.raises(AnalyticsError):
        classifier_accuracy({"a": "x"}, {"b": "x"})


# -- annotation table ---------------------------------------------------------

def test_annotation_table_round_trip():
    records = [
        AnnotationRecord("r1", "peers", "https://n.test/c1", "aspect", "syntax"),
        AnnotationRecord("r2", "modelExperts", "https://n.test/c1", "impact", "4"),
        AnnotationRecord("r3", "reviewer", "https://n.test/c2", "polarity", "moreContextNeeded"),
    ]
    assert parse_annotation_table(format_annotation_table(records)) == records


def test_annotation_table_rejects_bad_rows():
    with pytest.raises(AnalyticsError):
        parse_annotation_table("rater\tgroup\titem\tdimension\tanswer\nr1\tpeers\ti\taspect\n")
    with pytest.raises(AnalyticsError):
        parse_annotation_table("not\ta\theader\tat\tall\n")
    with pytest.raises(AnalyticsError):
        parse_annotation_table(
            "rater\tgroup\titem\tdimension\tanswer\nr1\tpeers\ti\taspect\tpurple\n"
        )
