"""Threshold-rule rejection of unanswerable questions.

A rule rejects a question when its answer's signal value passes a strict
threshold comparison (e.g. contradiction > 0.05, entailment < 0.5). Counts
treat rejection of an unanswerable question as a true positive.

The derived "recall" uses the full corpus size as its denominator, the
convention the reference results for SQuAD 2.0 were published under.
``recall_standard`` (denominator: unanswerable count) is reported alongside
so the discrepancy stays visible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InputError
from .records import EXTRACTIVE, QuestionRecord

REJECTION_SIGNALS = ("QA", "E", "C")
COMPARATORS = ("less_than", "greater_than")

# Signal/comparator pairings used by the published configurations; others
# are permitted but the CLI warns about them.
CONVENTIONAL_COMPARATOR = {"QA": "less_than", "E": "less_than", "C": "greater_than"}


@dataclass(frozen=True)
class RejectionRule:
    signal: str  # "QA" | "E" | "C"
    comparator: str  # "less_than" | "greater_than"
    threshold: float

    def __post_init__(self):
        if self.signal not in REJECTION_SIGNALS:
            raise InputError(f"unknown rejection signal {self.signal!r}")
        if self.comparator not in COMPARATORS:
            raise InputError(f"unknown comparator {self.comparator!r}")
        if not (0.0 <= self.threshold <= 1.0):
            raise InputError(f"threshold {self.threshold} outside [0,1]")

    @property
    def is_conventional(self) -> bool:
        return CONVENTIONAL_COMPARATOR[self.signal] == self.comparator

    @property
    def label(self) -> str:
        op = "<" if self.comparator == "less_than" else ">"
        return f"{self.signal} {op} {self.threshold * 100:g}%"


@dataclass(frozen=True)
class RejectionCounts:
    tp: int  # unanswerable and rejected
    fp: int  # answerable and rejected
    fn: int  # unanswerable and accepted
    tn: int  # answerable and accepted

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def unanswerable_total(self) -> int:
        return self.tp + self.fn


@dataclass(frozen=True)
class RejectionReport:
    rule: RejectionRule
    counts: RejectionCounts
    rejects: float | None  # tp / unanswerable_total
    accepts: float | None  # 1 - fp / total
    precision: float | None  # tp / (tp + fp)
    recall_total: float | None  # tp / total
    recall_standard: float | None  # tp / unanswerable_total
    f1: float | None


def _signal_value(record: QuestionRecord, signal: str) -> float:
    cand = record.candidates[0]
    if signal == "QA":
        return cand.qa_confidence
    if signal == "E":
        return cand.nli.entail
    return cand.nli.contradict


def rule_rejects(rule: RejectionRule, record: QuestionRecord) -> bool:
    value = _signal_value(record, rule.signal)
    if rule.comparator == "less_than":
        return value < rule.threshold
    return value > rule.threshold


def apply_rule(rule: RejectionRule, records: Sequence[QuestionRecord]) -> RejectionCounts:
    """Partition a corpus into rejection counts under one rule.

    Requires extractive records (empty gold spans = unanswerable) carrying
    exactly one candidate each.
    """
    tp = fp = fn = tn = 0
    for record in records:
        if record.task_kind != EXTRACTIVE:
            raise InputError(
                f"rejection evaluation requires extractive records, got "
                f"{record.task_kind!r} for {record.question_id!r}"
            )
        if len(record.candidates) != 1:
            raise InputError(
                f"question {record.question_id!r} must carry exactly one candidate, "
                f"has {len(record.candidates)}"
            )
        rejected = rule_rejects(rule, record)
        if record.is_unanswerable:
            if rejected:
                tp += 1
            else:
                fn += 1
        else:
            if rejected:
                fp += 1
            else:
                tn += 1
    return RejectionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def rejection_metrics(rule: RejectionRule, counts: RejectionCounts) -> RejectionReport:
    """Derived fractions for one rule. Zero denominators yield None, never 0."""

    def ratio(num: int, denom: int) -> float | None:
        return num / denom if denom > 0 else None

    total = counts.total
    unans = counts.unanswerable_total
    precision = ratio(counts.tp, counts.tp + counts.fp)
    recall_total = ratio(counts.tp, total)
    if recall_total is None:
        f1 = None
    elif counts.tp == 0:
        f1 = 0.0  # covers the reject-nothing rule, where precision is undefined
    else:
        assert precision is not None
        f1 = 2 * precision * recall_total / (precision + recall_total)
    accepts = None if total == 0 else 1.0 - counts.fp / total
    return RejectionReport(
        rule=rule,
        counts=counts,
        rejects=ratio(counts.tp, unans),
        accepts=accepts,
        precision=precision,
        recall_total=recall_total,
        recall_standard=ratio(counts.tp, unans),
        f1=f1,
    )


def evaluate_rule(rule: RejectionRule, records: Sequence[QuestionRecord]) -> RejectionReport:
    return rejection_metrics(rule, apply_rule(rule, records))


def threshold_sweep(
    signal: str,
    comparator: str,
    thresholds: Sequence[float],
    records: Sequence[QuestionRecord],
) -> list[RejectionReport]:
    """One report per threshold, in the given threshold order."""
    return [
        evaluate_rule(RejectionRule(signal=signal, comparator=comparator, threshold=t), records)
        for t in thresholds
    ]
