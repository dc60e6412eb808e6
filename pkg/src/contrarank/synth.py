"""Seeded synthetic score corpora with known generative coefficients.

Correctness is driven by a logistic model over the generated signals:
p(correct) = sigmoid(qa_weight * qa + e_weight * e + c_weight * c + intercept),
with qa drawn from a Beta distribution and the NLI triple from a Dirichlet.

Extractive corpora draws the label directly from that Bernoulli and encode it
in the gold spans (gold equals the produced answer exactly when correct), so
calibration training on them can recover the generating coefficients.
Multiple-choice corpora assign one gold candidate per question and draw each
candidate's signals from the label-conditional distribution by rejection
sampling, which preserves the same logistic relationship up to an intercept
shift from the gold base rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .records import (
    EXTRACTIVE,
    MULTIPLE_CHOICE,
    GoldAnswer,
    NliScores,
    QuestionRecord,
    ScoredCandidate,
)

# Pushes signal draws toward the extremes; keeps coefficients identifiable
# from holdouts as small as 100 examples.
_QA_BETA = (0.8, 0.8)
_NLI_DIRICHLET = (0.8, 0.8, 0.8)


@dataclass
class SynthSpec:
    n_questions: int
    candidates_per_question: int = 4
    task_kind: str = MULTIPLE_CHOICE
    qa_weight: float = 3.0
    e_weight: float = 1.5
    c_weight: float = -1.2
    intercept: float = -0.5
    seed: int = 0
    unanswerable_fraction: float = 0.0  # extractive only
    dataset_id: str = "synth"

    def validate(self) -> None:
        if self.n_questions < 1:
            raise ConfigError("n_questions must be >= 1")
        if self.task_kind not in (MULTIPLE_CHOICE, EXTRACTIVE):
            raise ConfigError(f"unknown task_kind {self.task_kind!r}")
        if self.task_kind == MULTIPLE_CHOICE and self.candidates_per_question < 2:
            raise ConfigError("multiple choice needs at least 2 candidates per question")
        if not (0.0 <= self.unanswerable_fraction <= 1.0):
            raise ConfigError("unanswerable_fraction outside [0,1]")
        if self.unanswerable_fraction > 0 and self.task_kind != EXTRACTIVE:
            raise ConfigError("unanswerable questions only exist in extractive corpora")


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def _draw_base(rng: np.random.Generator, size: int) -> np.ndarray:
    """Columns: qa, entail, neutral, contradict."""
    qa = rng.beta(*_QA_BETA, size=size)
    tri = rng.dirichlet(_NLI_DIRICHLET, size=size)
    return np.column_stack([qa, tri])


def _correct_probability(spec: SynthSpec, base: np.ndarray) -> np.ndarray:
    z = (
        spec.qa_weight * base[:, 0]
        + spec.e_weight * base[:, 1]
        + spec.c_weight * base[:, 3]
        + spec.intercept
    )
    return _sigmoid(z)


def _draw_conditional(
    spec: SynthSpec, rng: np.random.Generator, count: int, label: bool
) -> np.ndarray:
    """Draw ``count`` signal rows conditioned on the correctness label."""
    rows = []
    got = 0
    while got < count:
        batch = max(4 * (count - got), 64)
        base = _draw_base(rng, batch)
        p = _correct_probability(spec, base)
        drawn = rng.random(batch) < p
        keep = base[drawn == label]
        rows.append(keep)
        got += len(keep)
    return np.vstack(rows)[:count]


def _candidate(qid: str, idx: int, answer: str, signals: np.ndarray) -> ScoredCandidate:
    qa, e, n, c = signals
    # force the triple to sum to 1.0 after the Dirichlet draw's rounding
    e = float(e)
    c = float(c)
    n = 1.0 - e - c
    return ScoredCandidate(
        answer_text=answer,
        hypothesis_text=f"the answer to {qid} is {answer}",
        qa_confidence=float(qa),
        nli=NliScores(entail=e, neutral=n, contradict=c),
    )


def generate_synthetic(spec: SynthSpec) -> list[QuestionRecord]:
    """Deterministic synthetic corpus for the given spec."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    if spec.task_kind == MULTIPLE_CHOICE:
        return _generate_multiple_choice(spec, rng)
    return _generate_extractive(spec, rng)


def _generate_multiple_choice(spec: SynthSpec, rng: np.random.Generator) -> list[QuestionRecord]:
    n, k = spec.n_questions, spec.candidates_per_question
    gold_indices = rng.integers(0, k, size=n)
    gold_signals = _draw_conditional(spec, rng, n, True)
    distractor_signals = _draw_conditional(spec, rng, n * (k - 1), False)

    records = []
    d = 0
    for q in range(n):
        qid = f"{spec.dataset_id}-{q:05d}"
        candidates = []
        for i in range(k):
            if i == gold_indices[q]:
                signals = gold_signals[q]
            else:
                signals = distractor_signals[d]
                d += 1
            candidates.append(_candidate(qid, i, f"choice {i} of {qid}", signals))
        records.append(
            QuestionRecord(
                question_id=qid,
                dataset_id=spec.dataset_id,
                task_kind=MULTIPLE_CHOICE,
                question_text=f"synthetic question {qid}",
                context_text=f"context passage for {qid}",
                gold=GoldAnswer(choice_index=int(gold_indices[q])),
                candidates=tuple(candidates),
            )
        )
    return records


def _generate_extractive(spec: SynthSpec, rng: np.random.Generator) -> list[QuestionRecord]:
    n = spec.n_questions
    answerable = rng.random(n) >= spec.unanswerable_fraction
    base = _draw_base(rng, n)
    labels = rng.random(n) < _correct_probability(spec, base)
    # unanswerable questions carry signals that look incorrect
    n_unans = int((~answerable).sum())
    if n_unans:
        unans_signals = _draw_conditional(spec, rng, n_unans, False)
        base[~answerable] = unans_signals

    records = []
    for q in range(n):
        qid = f"{spec.dataset_id}-{q:05d}"
        answer = f"span{q:05d}"
        if not answerable[q]:
            gold = GoldAnswer(text_spans=())
        elif labels[q]:
            gold = GoldAnswer(text_spans=(answer,))
        else:
            gold = GoldAnswer(text_spans=(f"alt{q:05d}",))
        records.append(
            QuestionRecord(
                question_id=qid,
                dataset_id=spec.dataset_id,
                task_kind=EXTRACTIVE,
                question_text=f"synthetic question {qid}",
                context_text=f"context passage for {qid}",
                gold=gold,
                candidates=(_candidate(qid, 0, answer, base[q]),),
            )
        )
    return records
