"""Core evaluation metrics and the correlation report.

Metrics: multiple-choice accuracy, extractive token F1 with standard answer
normalization, and Spearman rank correlation with average-rank tie handling.
Degenerate inputs (empty record lists, constant series) yield None rather
than a silent zero.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import InputError
from .records import MULTIPLE_CHOICE, QuestionRecord

if TYPE_CHECKING:
    from .ranking import RankedAnswer

# An extractive answer counts as correct when its best token F1 against the
# gold spans reaches this threshold.
EXTRACTIVE_CORRECT_F1 = 0.5

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)

CORRELATION_SIGNALS = ("qa", "e_score", "e_class", "c_score", "c_class", "n_score", "n_class")


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation and articles, collapse whitespace."""
    text = text.lower().translate(_PUNCT_TABLE)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def _f1_pair(pred_tokens: list[str], gold_tokens: list[str]) -> float:
    if not pred_tokens or not gold_tokens:
        return float(pred_tokens == gold_tokens)
    common = Counter(pred_tokens) & Counter(gold_tokens)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def token_f1(prediction: str, golds: Sequence[str]) -> float:
    """Best token-level F1 of the prediction against any gold span.

    An empty gold list marks an unanswerable question: only an empty
    prediction scores 1.0 there.
    """
    pred_tokens = normalize_answer(prediction).split()
    if not golds:
        return float(not pred_tokens)
    return max(_f1_pair(pred_tokens, normalize_answer(g).split()) for g in golds)


def candidate_is_correct(record: QuestionRecord, candidate_index: int) -> bool:
    """Whether a candidate answers its question correctly.

    Multiple choice compares against the gold choice index; extractive
    applies the token-F1 threshold against the gold spans.
    """
    if record.task_kind == MULTIPLE_CHOICE:
        return candidate_index == record.gold.choice_index
    answer = record.candidates[candidate_index].answer_text
    return token_f1(answer, list(record.gold.text_spans)) >= EXTRACTIVE_CORRECT_F1


def mc_accuracy(
    records: Sequence[QuestionRecord],
    selections: Sequence[Sequence["RankedAnswer"]],
) -> float | None:
    """Fraction of questions whose selected candidate is the gold choice."""
    if len(records) != len(selections):
        raise InputError(
            f"records ({len(records)}) and selections ({len(selections)}) are misaligned"
        )
    if not records:
        return None
    correct = 0
    for record, ranked in zip(records, selections):
        selected = [r for r in ranked if r.selected]
        if len(selected) != 1:
            raise InputError(f"question {record.question_id!r} has {len(selected)} selections")
        if selected[0].candidate_index == record.gold.choice_index:
            correct += 1
    return correct / len(records)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Spearman rank correlation with average-rank ties.

    Returns None for series shorter than 2 or with zero rank variance.
    """
    if len(xs) != len(ys):
        raise InputError(f"series lengths differ: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        return None
    rx = _average_ranks(np.asarray(xs, dtype=float))
    ry = _average_ranks(np.asarray(ys, dtype=float))
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = np.sqrt((dx * dx).sum() * (dy * dy).sum())
    if denom == 0.0:
        return None
    return float((dx * dy).sum() / denom)


def signal_value(candidate, signal: str) -> float:
    """Extract one correlation signal from a scored candidate."""
    nli = candidate.nli
    if signal == "qa":
        return candidate.qa_confidence
    if signal == "e_score":
        return nli.entail
    if signal == "e_class":
        return float(nli.entail > 0.5)
    if signal == "c_score":
        return nli.contradict
    if signal == "c_class":
        return float(nli.contradict > 0.5)
    if signal == "n_score":
        return nli.neutral
    if signal == "n_class":
        return float(nli.neutral > 0.5)
    raise InputError(f"unknown signal {signal!r}")


@dataclass(frozen=True)
class CorrelationRow:
    dataset_id: str  # "all" under pooled scope
    signal: str
    rho: float | None


@dataclass
class CorrelationReport:
    scope: str  # "per_dataset" | "pooled"
    rows: list[CorrelationRow]

    def rho(self, dataset_id: str, signal: str) -> float | None:
        for row in self.rows:
            if row.dataset_id == dataset_id and row.signal == signal:
                return row.rho
        raise KeyError((dataset_id, signal))


def _observations(
    records: Sequence[QuestionRecord], answered_only: bool
) -> list[tuple[str, object, float]]:
    """(dataset_id, candidate, correctness) observations.

    Multiple choice contributes every candidate; extractive contributes the
    answer the QA model produced (its highest-confidence candidate).
    """
    obs = []
    for record in records:
        if record.task_kind == MULTIPLE_CHOICE:
            for i, cand in enumerate(record.candidates):
                obs.append((record.dataset_id, cand, float(candidate_is_correct(record, i))))
        else:
            if answered_only and record.is_unanswerable:
                continue
            best = max(range(len(record.candidates)), key=lambda i: record.candidates[i].qa_confidence)
            obs.append(
                (record.dataset_id, record.candidates[best], float(candidate_is_correct(record, best)))
            )
    return obs


def correlation_report(
    records: Sequence[QuestionRecord],
    signals: Sequence[str] = CORRELATION_SIGNALS,
    scope: str = "per_dataset",
    answered_only: bool = False,
) -> CorrelationReport:
    """Spearman correlation of each signal against answer correctness.

    Class signals are binarized at 0.5 before ranking. Cells whose series
    are degenerate come back as None.
    """
    if scope not in ("per_dataset", "pooled"):
        raise InputError(f"unknown scope {scope!r}")
    for signal in signals:
        if signal not in CORRELATION_SIGNALS:
            raise InputError(f"unknown signal {signal!r}")
    obs = _observations(records, answered_only)
    if scope == "pooled":
        groups = {"all": obs}
    else:
        groups = {}
        for dataset_id, cand, label in obs:
            groups.setdefault(dataset_id, []).append((dataset_id, cand, label))
        groups = {k: groups[k] for k in sorted(groups)}

    rows = []
    for dataset_id, group in groups.items():
        labels = [label for _, _, label in group]
        for signal in signals:
            series = [signal_value(cand, signal) for _, cand, _ in group]
            rows.append(CorrelationRow(dataset_id, signal, spearman_rho(series, labels)))
    return CorrelationReport(scope=scope, rows=rows)
