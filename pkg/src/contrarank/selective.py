"""Selective QA: answer only the most-confident fraction of questions.

Questions are sorted by a policy's question confidence (descending, ties by
question id) and the top floor(coverage * N) of them (at least one) are
scored: accuracy for multiple choice, mean token F1 for extractive. For
multiple choice the answer being scored is the QA model's own selection by
default; ``selection="policy"`` scores the policy's selection instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .analytics import candidate_is_correct, token_f1
from .errors import InputError
from .ranking import RankingPolicy, question_confidence, rank_score, selected_index
from .records import MULTIPLE_CHOICE, QuestionRecord

SELECTION_MODES = ("qa", "policy")
DEFAULT_COVERAGES = (0.2, 0.5)


@dataclass(frozen=True)
class CoverageRow:
    coverage: float
    n_answered: int
    metric_name: str  # "accuracy" | "f1"
    metric_value: float


@dataclass
class CoverageReport:
    dataset_id: str  # "all" when records span several datasets
    policy_name: str
    rows: list[CoverageRow]

    def value_at(self, coverage: float) -> float:
        for row in self.rows:
            if row.coverage == coverage:
                return row.metric_value
        raise KeyError(coverage)


def _question_score(
    record: QuestionRecord, policy: RankingPolicy, selection: str
) -> tuple[float, float]:
    """(confidence used for sorting, metric value if answered)."""
    if record.task_kind == MULTIPLE_CHOICE:
        if selection == "qa":
            answer_idx = max(
                range(len(record.candidates)),
                key=lambda i: (record.candidates[i].qa_confidence, -i),
            )
            confidence = rank_score(policy, record.candidates[answer_idx])
        else:
            answer_idx = selected_index(policy, record)
            confidence = rank_score(policy, record.candidates[answer_idx])
        return confidence, float(candidate_is_correct(record, answer_idx))
    # extractive: score the answer the QA model produced
    answer_idx = max(
        range(len(record.candidates)),
        key=lambda i: (record.candidates[i].qa_confidence, -i),
    )
    confidence = question_confidence(policy, record)
    value = token_f1(record.candidates[answer_idx].answer_text, list(record.gold.text_spans))
    return confidence, value


def _task_kind(records: Sequence[QuestionRecord]) -> str:
    kinds = {r.task_kind for r in records}
    if len(kinds) != 1:
        raise InputError(f"selective evaluation needs a single task kind, found {sorted(kinds)}")
    return kinds.pop()


def coverage_curve(
    records: Sequence[QuestionRecord],
    policy: RankingPolicy,
    coverages: Sequence[float] = DEFAULT_COVERAGES,
    selection: str = "qa",
) -> CoverageReport:
    """Metric over the most-confident fraction of questions, per coverage."""
    if not records:
        raise InputError("no records to evaluate")
    if selection not in SELECTION_MODES:
        raise InputError(f"unknown selection mode {selection!r}")
    for c in coverages:
        if not (0.0 < c <= 1.0):
            raise InputError(f"coverage {c} outside (0, 1]")

    scored = []
    for record in records:
        confidence, value = _question_score(record, policy, selection)
        scored.append((confidence, record.question_id, value))
    # highest confidence first; question id breaks ties deterministically
    scored.sort(key=lambda t: (-t[0], t[1]))

    task = _task_kind(records)
    metric_name = "accuracy" if task == MULTIPLE_CHOICE else "f1"
    rows = []
    for c in coverages:
        n = max(1, math.floor(c * len(scored)))
        answered = scored[:n]
        value = sum(v for _, _, v in answered) / n
        rows.append(CoverageRow(coverage=c, n_answered=n, metric_name=metric_name, metric_value=value))

    dataset_ids = {r.dataset_id for r in records}
    dataset_id = dataset_ids.pop() if len(dataset_ids) == 1 else "all"
    return CoverageReport(dataset_id=dataset_id, policy_name=policy.name, rows=rows)


@dataclass
class ComparisonGrid:
    """Policy-by-coverage metric grid, one row block per dataset plus "avg"."""

    metric_name: str
    coverages: list[float]
    policy_names: list[str]
    dataset_ids: list[str]  # without the "avg" row
    values: dict  # (coverage, dataset_id | "avg", policy_name) -> float

    def value(self, coverage: float, dataset_id: str, policy_name: str) -> float:
        return self.values[(coverage, dataset_id, policy_name)]


def compare_policies(
    records: Sequence[QuestionRecord],
    policies: Sequence[RankingPolicy],
    coverages: Sequence[float] = DEFAULT_COVERAGES,
    selection: str = "qa",
) -> ComparisonGrid:
    """Coverage curves for every policy, grouped per dataset with an average row."""
    if not records:
        raise InputError("no records to evaluate")
    task = _task_kind(records)
    by_dataset: dict[str, list[QuestionRecord]] = {}
    for record in records:
        by_dataset.setdefault(record.dataset_id, []).append(record)
    dataset_ids = sorted(by_dataset)

    names = []
    values: dict = {}
    for policy in policies:
        name = policy.name
        names.append(name)
        for dataset_id in dataset_ids:
            report = coverage_curve(by_dataset[dataset_id], policy, coverages, selection)
            for row in report.rows:
                values[(row.coverage, dataset_id, name)] = row.metric_value
        for c in coverages:
            values[(c, "avg", name)] = sum(
                values[(c, d, name)] for d in dataset_ids
            ) / len(dataset_ids)

    metric_name = "accuracy" if task == MULTIPLE_CHOICE else "f1"
    return ComparisonGrid(
        metric_name=metric_name,
        coverages=list(coverages),
        policy_names=names,
        dataset_ids=dataset_ids,
        values=values,
    )
