import numpy as np
import pytest
import scipy.stats
from conftest import make_ext_record, make_mc_record

from contrarank.analytics import (
    candidate_is_correct,
    correlation_report,
    mc_accuracy,
    normalize_answer,
    spearman_rho,
    token_f1,
)
from contrarank.errors import InputError
from contrarank.ranking import RankingPolicy, select_answer


def test_normalize_answer():
    assert normalize_answer("The Eiffel Tower!") == "eiffel tower"
    assert normalize_answer("a  dog") == "dog"
    assert normalize_answer("") == ""
    assert normalize_answer("An apple; a day.") == "apple day"


def test_token_f1_exact_match():
    assert token_f1("Paris", ["Paris"]) == 1.0


def test_token_f1_partial():
    # after article removal: pred [cat, sat], gold [cat, sat, down]
    assert token_f1("the cat sat", ["cat sat down"]) == pytest.approx(0.8)


def test_token_f1_unanswerable_conventions():
    assert token_f1("x", []) == 0.0
    assert token_f1("", []) == 1.0
    assert token_f1("the", []) == 1.0  # normalizes to empty


def test_token_f1_max_over_golds():
    assert token_f1("cat sat", ["dog sat", "cat sat"]) == 1.0


def test_token_f1_symmetric_for_single_gold(rng):
    vocab = ["cat", "dog", "sat", "ran", "the", "a", "blue"]
    for _ in range(50):
        a = " ".join(rng.choice(vocab, size=rng.integers(0, 5)))
        b = " ".join(rng.choice(vocab, size=rng.integers(0, 5)))
        assert token_f1(a, [b]) == pytest.approx(token_f1(b, [a]))


def test_spearman_monotone_series():
    assert spearman_rho([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
    assert spearman_rho([1, 2, 3], [30, 20, 10]) == pytest.approx(-1.0)


def test_spearman_with_ties_matches_reference():
    xs, ys = [1, 2, 2, 3], [1, 3, 2, 4]
    expected = 3 / np.sqrt(10)  # hand-computed from average ranks
    assert spearman_rho(xs, ys) == pytest.approx(expected, abs=1e-12)
    ref = scipy.stats.spearmanr(xs, ys).statistic
    assert spearman_rho(xs, ys) == pytest.approx(ref, abs=1e-12)


def test_spearman_degenerate_and_errors():
    assert spearman_rho([1.0, 1.0, 1.0], [1, 2, 3]) is None
    assert spearman_rho([1.0], [2.0]) is None
    with pytest.raises(InputError):
        spearman_rho([1, 2], [1, 2, 3])


def test_spearman_symmetry_and_negation(rng):
    for _ in range(20):
        xs = rng.integers(0, 5, size=12).astype(float)
        ys = rng.integers(0, 5, size=12).astype(float)
        rho = spearman_rho(list(xs), list(ys))
        if rho is None:
            continue
        assert spearman_rho(list(ys), list(xs)) == rho
        assert spearman_rho(list(xs), list(-ys)) == -rho


def test_spearman_invariant_under_increasing_transform(rng):
    xs = list(rng.random(30))
    ys = list(rng.random(30))
    rho = spearman_rho(xs, ys)
    transformed = [np.exp(3 * x) + 1 for x in xs]
    assert spearman_rho(transformed, ys) == pytest.approx(rho, abs=1e-12)


def test_mc_accuracy():
    records = [
        make_mc_record("q1", [(0.9, 0.6, 0.1), (0.1, 0.2, 0.7)], gold_index=0),
        make_mc_record("q2", [(0.9, 0.6, 0.1), (0.1, 0.2, 0.7)], gold_index=1),
        make_mc_record("q3", [(0.9, 0.6, 0.1), (0.1, 0.2, 0.7)], gold_index=0),
        make_mc_record("q4", [(0.9, 0.6, 0.1), (0.1, 0.2, 0.7)], gold_index=0),
    ]
    policy = RankingPolicy.single("QA")
    selections = [select_answer(policy, r) for r in records]
    assert mc_accuracy(records, selections) == pytest.approx(0.75)
    all_correct = records[:1] + records[2:]
    assert mc_accuracy(all_correct, [select_answer(policy, r) for r in all_correct]) == 1.0


def test_mc_accuracy_degenerate_and_misaligned():
    assert mc_accuracy([], []) is None
    record = make_mc_record("q1", [(0.9, 0.6, 0.1)], gold_index=0)
    with pytest.raises(InputError, match="misaligned"):
        mc_accuracy([record], [])


def test_candidate_is_correct_extractive_threshold():
    hit = make_ext_record("q1", 0.5, 0.4, 0.1, golds=["predicted span"])
    miss = make_ext_record("q2", 0.5, 0.4, 0.1, golds=["unrelated words"])
    assert candidate_is_correct(hit, 0)
    assert not candidate_is_correct(miss, 0)


def _mc_corpus_correct_iff_low_contradiction(rng, n=400):
    """Gold candidate has contradict < 0.3, distractors >= 0.3, exactly."""
    records = []
    for q in range(n):
        gold = int(rng.integers(0, 3))
        scores = []
        for i in range(3):
            c = rng.uniform(0.0, 0.29) if i == gold else rng.uniform(0.31, 0.9)
            scores.append((float(rng.random()), float(rng.uniform(0, 1 - c)), float(c)))
        records.append(make_mc_record(f"q{q:04d}", scores, gold))
    return records


def test_correlation_signs_track_construction(rng):
    records = _mc_corpus_correct_iff_low_contradiction(rng)
    report = correlation_report(records, scope="pooled")
    assert report.rho("all", "c_score") < -0.7
    assert report.rho("all", "c_class") < 0.0


def test_correlation_independent_signals_near_zero(rng):
    records = []
    for q in range(10000):
        correct = bool(rng.random() < 0.5)
        records.append(
            make_ext_record(
                f"q{q:05d}",
                float(rng.random()),
                *(lambda t: (float(t[0]), float(t[2])))(rng.dirichlet((1, 1, 1))),
                golds=["predicted span"] if correct else ["other text"],
            )
        )
    report = correlation_report(records, scope="pooled")
    for signal in ("qa", "e_score", "c_score", "n_score", "e_class", "c_class", "n_class"):
        assert abs(report.rho("all", signal)) < 0.05


def test_correlation_per_dataset_grouping():
    records = [
        make_mc_record("q1", [(0.9, 0.6, 0.1), (0.1, 0.2, 0.7)], 0, dataset_id="d1"),
        make_mc_record("q2", [(0.8, 0.5, 0.2), (0.3, 0.3, 0.5)], 0, dataset_id="d2"),
    ]
    report = correlation_report(records, scope="per_dataset")
    assert {row.dataset_id for row in report.rows} == {"d1", "d2"}


def test_correlation_degenerate_cell_is_none():
    records = [make_mc_record("q1", [(0.9, 0.6, 0.1), (0.1, 0.2, 0.7)], 0)]
    # both candidates share the question; with 2 observations the label series
    # has variance but a constant signal series must yield None
    records = [
        make_mc_record("q1", [(0.5, 0.6, 0.1), (0.5, 0.2, 0.7)], 0),
    ]
    report = correlation_report(records, scope="pooled")
    assert report.rho("all", "qa") is None


def test_correlation_answered_only_drops_unanswerable():
    records = [
        make_ext_record("q1", 0.9, 0.7, 0.1, golds=["predicted span"]),
        make_ext_record("q2", 0.2, 0.1, 0.8, golds=["other"]),
        make_ext_record("q3", 0.4, 0.3, 0.4, golds=[]),
    ]
    full = correlation_report(records, scope="pooled")
    dropped = correlation_report(records, scope="pooled", answered_only=True)
    assert full.rho("all", "qa") is not None
    assert dropped.rho("all", "qa") is not None
    assert full.rho("all", "qa") != dropped.rho("all", "qa")
