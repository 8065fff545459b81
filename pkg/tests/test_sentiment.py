from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linkflows.model import Polarity
from linkflows.sentiment import (
    Lexicon,
    LexiconError,
    batch_classify,
    bundled_lexicon,
    classify,
    evaluate_against_ground_truth,
)


@pytest.fixture
def toy():
    return Lexicon(
        entries={"good": 3.0, "bad": -3.0, "unclear": -2.0, "excellent": 4.0},
        intensifiers={"very": 1.5, "really": 1.5, "slightly": 0.5},
        negators={"not", "no"},
    )


def test_empty_text_is_neutral(toy):
    prediction = classify("", toy)
    assert prediction.raw_score == 0.0
    assert prediction.label is Polarity.NEUTRAL
    assert prediction.evidence == []


def test_negation_shifts_not_flips(toy):
    # hand trace: 3 - 4 = -1, below -epsilon at 0.5
    prediction = classify("not good", toy)
    assert prediction.raw_score == pytest.approx(-1.0)
    assert prediction.label is Polarity.NEGATIVE
    assert prediction.evidence == [("good", -1.0)]


def test_intensifier_multiplies(toy):
    prediction = classify("very good", toy)
    assert prediction.raw_score == pytest.approx(4.5)
    assert prediction.label is Polarity.POSITIVE


def test_intensifiers_stack(toy):
    prediction = classify("really very good", toy)
    assert prediction.raw_score == pytest.approx(3.0 * 1.5 * 1.5)


def test_negated_negative_shifts_up(toy):
    prediction = classify("not bad", toy)
    assert prediction.raw_score == pytest.approx(1.0)
    assert prediction.label is Polarity.POSITIVE


def test_negator_window_is_three_tokens(toy):
    # negator four tokens back is out of the window
    far = classify("not the text that was good", toy)
    assert far.raw_score == pytest.approx(3.0)
    near = classify("not really very good", toy)
    assert near.raw_score == pytest.approx(3.0 * 1.5 * 1.5 - 4.0)


def test_score_is_mean_over_hits(toy):
    prediction = classify("good but unclear", toy)
    assert prediction.raw_score == pytest.approx((3.0 - 2.0) / 2)
    assert prediction.label is Polarity.NEUTRAL


def test_neutral_band_is_inclusive(toy):
    lex = Lexicon(entries={"meh": 0.5, "blah": -0.5})
    assert classify("meh", lex).label is Polarity.NEUTRAL
    assert classify("blah", lex).label is Polarity.NEUTRAL


def test_empty_lexicon_rejected():
    with pytest.raises(LexiconError):
        classify("anything", Lexicon(entries={}))


def test_classify_is_pure(toy):
    a = classify("very good but not excellent", toy)
    b = classify("very good but not excellent", toy)
    assert a.to_dict() == b.to_dict()


def test_batch_matches_elementwise(toy):
    items = [("i1", "good"), ("i2", "not good"), ("i3", "nothing here")]
    batch = batch_classify(items, toy)
    assert [p.item for p in batch] == ["i1", "i2", "i3"]
    for (iri, text), got in zip(items, batch):
        solo = classify(text, toy, item=iri)
        assert got.to_dict() == solo.to_dict()


@given(st.lists(st.sampled_from(["good", "excellent", "the", "and", "draft"]), max_size=12))
def test_sign_coherence_all_positive_hits(words):
    lex = Lexicon(entries={"good": 3.0, "excellent": 4.0})
    prediction = classify(" ".join(words), lex)
    assert all(score > 0 for _, score in prediction.evidence)
    assert prediction.label in (Polarity.NEUTRAL, Polarity.POSITIVE)


@given(st.lists(st.sampled_from(["bad", "unclear", "the", "and", "draft"]), max_size=12))
def test_sign_coherence_all_negative_hits(words):
    lex = Lexicon(entries={"bad": -3.0, "unclear": -2.0})
    prediction = classify(" ".join(words), lex)
    assert all(score < 0 for _, score in prediction.evidence)
    assert prediction.label in (Polarity.NEUTRAL, Polarity.NEGATIVE)


# -- lexicon file format ------------------------------------------------------

def test_lexicon_parse_sections():
    lex = Lexicon.from_text(
        "# comment line\n"
        "good\t3\n"
        "bad\t-3\n"
        "[intensifiers]\n"
        "very\t1.5\n"
        "[negators]\n"
        "not\n"
    )
    assert lex.entries == {"good": 3.0, "bad": -3.0}
    assert lex.intensifiers == {"very": 1.5}
    assert lex.negators == {"not"}


def test_lexicon_rejects_out_of_range_valence():
    with pytest.raises(LexiconError):
        Lexicon.from_text("huge\t9\n")


def test_lexicon_rejects_nonpositive_multiplier():
    with pytest.raises(LexiconError):
        Lexicon.from_text("good\t2\n[intensifiers]\nvery\t0\n")


def test_lexicon_rejects_malformed_rows():
    with pytest.raises(LexiconError):
        Lexicon.from_text("good 3\n")


def test_bundled_lexicon_loads():
    lex = bundled_lexicon()
    assert len(lex.entries) >= 180
    assert all(-5 <= v <= 5 for v in lex.entries.values())
    assert lex.intensifiers and lex.negators
    assert classify("the proofs are rigorous and the writing is clear", lex).label is Polarity.POSITIVE
    assert classify("unclear notation and missing citations", lex).label is Polarity.NEGATIVE


# -- evaluation ---------------------------------------------------------------

def test_perfect_predictions_give_diagonal_matrix(toy):
    truth = {"a": "positive", "b": "negative", "c": "neutral"}
    report = evaluate_against_ground_truth(dict(truth), truth)
    assert report.accuracy == 1.0
    assert report.confusion[0][0] + report.confusion[1][1] + report.confusion[2][2] == 3


def test_all_neutral_vs_all_negative():
    truth = {f"i{k}": "negative" for k in range(4)}
    predictions = {f"i{k}": "neutral" for k in range(4)}
    report = evaluate_against_ground_truth(predictions, truth)
    assert report.accuracy == 0.0
    neg, neu = report.labels.index("negative"), report.labels.index("neutral")
    assert report.confusion[neg][neu] == 4


def test_confusion_rows_sum_to_truth_counts_and_trace_is_accuracy(toy):
    texts = {
        "i0": ("good work", "positive"),
        "i1": ("not good", "negative"),
        "i2": ("bad structure", "negative"),
        "i3": ("very unclear", "negative"),
        "i4": ("excellent survey", "positive"),
        "i5": ("plain text", "neutral"),
        "i6": ("not bad", "neutral"),
        "i7": ("really excellent", "positive"),
        "i8": ("slightly bad", "negative"),
        "i9": ("good but unclear", "neutral"),
    }
    truth = {item: label for item, (_, label) in texts.items()}
    predictions = batch_classify([(item, text) for item, (text, _) in texts.items()], toy)

    # manual count of matches on the fixture
    by_item = {p.item: p.label.value for p in predictions}
    manual = sum(1 for item in texts if by_item[item] == truth[item])

    report = evaluate_against_ground_truth(predictions, truth)
    assert report.accuracy == pytest.approx(manual / 10)
    trace = sum(report.confusion[i][i] for i in range(3))
    assert trace == manual
    for i, label in enumerate(report.labels):
        assert sum(report.confusion[i]) == sum(1 for v in truth.values() if v == label)
    assert report.n_items == 10
