import pytest
from conftest import make_ext_record, make_mc_record

from contrarank.errors import InputError
from contrarank.rejection import (
    RejectionCounts,
    RejectionRule,
    apply_rule,
    evaluate_rule,
    rejection_metrics,
    threshold_sweep,
)

# Reference operating points for threshold rejection on the SQuAD 2.0 dev set
# (11,873 questions of which 5,945 are unanswerable). Counts are back-solved
# from the published percentages: tp = round(recall * total),
# fp = round((1 - accepts) * total).
SQUAD2_TOTAL = 11873
SQUAD2_UNANSWERABLE = 5945


def unanswerable(qid, qa=0.5, e=0.3, c=0.3):
    return make_ext_record(qid, qa, e, c, golds=[])


def answerable(qid, qa=0.5, e=0.3, c=0.3):
    return make_ext_record(qid, qa, e, c, golds=["predicted span"])


def test_rule_label_and_validation():
    rule = RejectionRule("C", "greater_than", 0.05)
    assert rule.label == "C > 5%"
    assert rule.is_conventional
    assert not RejectionRule("C", "less_than", 0.05).is_conventional
    with pytest.raises(InputError):
        RejectionRule("X", "greater_than", 0.5)
    with pytest.raises(InputError):
        RejectionRule("C", "above", 0.5)
    with pytest.raises(InputError):
        RejectionRule("C", "greater_than", 1.5)


def test_apply_rule_counts_partition():
    records = [
        unanswerable("u1", c=0.7),
        unanswerable("u2", c=0.9),
        answerable("a1", c=0.8),
        answerable("a2", c=0.1),
    ]
    counts = apply_rule(RejectionRule("C", "greater_than", 0.5), records)
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == (2, 1, 0, 1)
    assert counts.total == 4
    assert counts.unanswerable_total == 2


def test_strict_comparison_at_boundary():
    record = answerable("a1", e=0.5)
    counts = apply_rule(RejectionRule("E", "less_than", 0.5), [record])
    assert counts.fp == 0 and counts.tn == 1


def test_mc_records_rejected():
    record = make_mc_record("q1", [(0.5, 0.3, 0.2), (0.5, 0.3, 0.2)], 0)
    with pytest.raises(InputError, match="extractive"):
        apply_rule(RejectionRule("C", "greater_than", 0.5), [record])


def test_multi_candidate_extractive_rejected():
    record = make_ext_record("q1", 0.5, 0.3, 0.2, golds=["x"])
    doubled = type(record)(
        **{**record.__dict__, "candidates": record.candidates * 2}
    )
    with pytest.raises(InputError, match="exactly one candidate"):
        apply_rule(RejectionRule("QA", "less_than", 0.5), [doubled])


def test_reject_nothing_rule():
    report = rejection_metrics(
        RejectionRule("C", "greater_than", 1.0),
        RejectionCounts(tp=0, fp=0, fn=10, tn=20),
    )
    assert report.precision is None
    assert report.f1 == 0.0
    assert report.accepts == 1.0
    assert report.rejects == 0.0


def test_reject_everything_rule():
    counts = RejectionCounts(tp=10, fp=20, fn=0, tn=0)
    report = rejection_metrics(RejectionRule("C", "greater_than", 0.0), counts)
    assert report.rejects == 1.0
    assert report.accepts == pytest.approx(10 / 30)
    assert report.recall_standard == 1.0


def test_zero_denominators_are_none_not_zero():
    report = rejection_metrics(
        RejectionRule("QA", "less_than", 0.5), RejectionCounts(tp=0, fp=0, fn=0, tn=0)
    )
    assert report.precision is None
    assert report.accepts is None
    assert report.recall_total is None
    assert report.recall_standard is None
    assert report.f1 is None


@pytest.mark.parametrize(
    "published_recall, published_accepts, expected",
    [
        # (recall, accepts) -> (rejects, accepts, precision, recall, f1)
        (0.2142, 0.9935, (0.4277, 0.9935, 0.9706, 0.2142, 0.3509)),  # C > 50%
        (0.3852, 0.9152, (0.7694, 0.9152, 0.8196, 0.3852, 0.5241)),  # E < 50%
        (0.3813, 0.9323, (0.7615, 0.9323, 0.8492, 0.3813, 0.5263)),  # C > 5%
    ],
)
def test_reference_rows_reproduced(published_recall, published_accepts, expected):
    tp = round(published_recall * SQUAD2_TOTAL)
    fp = round((1 - published_accepts) * SQUAD2_TOTAL)
    counts = RejectionCounts(
        tp=tp, fp=fp, fn=SQUAD2_UNANSWERABLE - tp, tn=SQUAD2_TOTAL - SQUAD2_UNANSWERABLE - fp
    )
    report = rejection_metrics(RejectionRule("C", "greater_than", 0.5), counts)
    rejects, accepts, precision, recall, f1 = expected
    tol = 0.0002  # +/- 0.02 percentage points
    assert report.rejects == pytest.approx(rejects, abs=tol)
    assert report.accepts == pytest.approx(accepts, abs=tol)
    assert report.precision == pytest.approx(precision, abs=tol)
    assert report.recall_total == pytest.approx(recall, abs=tol)
    assert report.f1 == pytest.approx(f1, abs=tol)


def test_threshold_sweep_ordering_and_empty():
    records = [unanswerable("u1", c=0.3), answerable("a1", c=0.1)]
    reports = threshold_sweep("C", "greater_than", [0.05, 0.10, 0.25, 0.50], records)
    assert [r.rule.threshold for r in reports] == [0.05, 0.10, 0.25, 0.50]
    assert [r.rule.label for r in reports] == ["C > 5%", "C > 10%", "C > 25%", "C > 50%"]
    assert threshold_sweep("C", "greater_than", [], records) == []


def test_threshold_zero_greater_than_rejects_positive_signals():
    records = [unanswerable("u1", c=0.001), answerable("a1", c=0.0)]
    counts = apply_rule(RejectionRule("C", "greater_than", 0.0), records)
    assert counts.tp == 1 and counts.fp == 0


def test_sweep_monotonicity(rng):
    records = []
    for i in range(60):
        e, _, c = rng.dirichlet((1, 1, 1))
        qa = float(rng.random())
        if rng.random() < 0.4:
            records.append(unanswerable(f"u{i}", qa=qa, e=float(e), c=float(c)))
        else:
            records.append(answerable(f"a{i}", qa=qa, e=float(e), c=float(c)))
    thresholds = [0.0, 0.1, 0.3, 0.5, 0.8, 1.0]
    gt = [apply_rule(RejectionRule("C", "greater_than", t), records) for t in thresholds]
    for a, b in zip(gt, gt[1:]):
        assert b.tp <= a.tp and b.fp <= a.fp
    lt = [apply_rule(RejectionRule("E", "less_than", t), records) for t in thresholds]
    for a, b in zip(lt, lt[1:]):
        assert b.tp >= a.tp and b.fp >= a.fp


def test_brute_force_field_agreement(rng):
    records = []
    for i in range(50):
        e, _, c = rng.dirichlet((1, 1, 1))
        qa = float(rng.random())
        if rng.random() < 0.5:
            records.append(unanswerable(f"u{i}", qa=qa, e=float(e), c=float(c)))
        else:
            records.append(answerable(f"a{i}", qa=qa, e=float(e), c=float(c)))
    for signal, comparator, threshold in (
        ("C", "greater_than", 0.2),
        ("E", "less_than", 0.4),
        ("QA", "less_than", 0.6),
    ):
        rule = RejectionRule(signal, comparator, threshold)
        report = evaluate_rule(rule, records)
        # independent per-record enumeration
        value = {"QA": lambda r: r.candidates[0].qa_confidence,
                 "E": lambda r: r.candidates[0].nli.entail,
                 "C": lambda r: r.candidates[0].nli.contradict}[signal]
        rejected = [
            r for r in records
            if (value(r) < threshold if comparator == "less_than" else value(r) > threshold)
        ]
        tp = sum(1 for r in rejected if r.is_unanswerable)
        fp = len(rejected) - tp
        unans = sum(1 for r in records if r.is_unanswerable)
        assert report.counts.tp == tp
        assert report.counts.fp == fp
        assert report.rejects == pytest.approx(tp / unans)
        assert report.accepts == pytest.approx(1 - fp / len(records))
        assert report.recall_total == pytest.approx(tp / len(records))
        assert report.recall_standard == pytest.approx(tp / unans)
        if tp + fp:
            assert report.precision == pytest.approx(tp / (tp + fp))


def test_counts_partition_property(rng):
    records = [
        (unanswerable if rng.random() < 0.5 else answerable)(
            f"q{i}", qa=float(rng.random()), e=0.2, c=0.3
        )
        for i in range(40)
    ]
    for t in (0.0, 0.25, 0.5, 1.0):
        counts = apply_rule(RejectionRule("QA", "less_than", t), records)
        assert counts.total == 40
        assert counts.tp + counts.fn == counts.unanswerable_total
