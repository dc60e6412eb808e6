"""Answer selection: argmax of a ranking scalar over a question's candidates.

A policy is either a trained calibration model or a single raw signal. The
contradiction signal is inverted (1 - c) so that argmax selects the least
contradicted answer; all other single signals rank by their raw value.
Ties break to the lowest candidate index.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calibration import CalibrationModel, extract_features, predict
from .errors import ConfigError, InputError
from .records import MULTIPLE_CHOICE, QuestionRecord, ScoredCandidate

SINGLE_SIGNALS = ("QA", "E", "C", "N")


@dataclass(frozen=True)
class RankingPolicy:
    kind: str  # "calibrated" | "single"
    model: CalibrationModel | None = None
    signal: str | None = None

    @classmethod
    def single(cls, signal: str) -> "RankingPolicy":
        signal = signal.upper()
        if signal not in SINGLE_SIGNALS:
            raise ConfigError(f"unknown signal {signal!r}")
        return cls(kind="single", signal=signal)

    @classmethod
    def calibrated(cls, model: CalibrationModel) -> "RankingPolicy":
        return cls(kind="calibrated", model=model)

    @property
    def name(self) -> str:
        if self.kind == "single":
            return self.signal or "?"
        return self.model.feature_set.name if self.model else "?"


@dataclass(frozen=True)
class RankedAnswer:
    candidate_index: int
    rank_score: float
    selected: bool


@dataclass(frozen=True)
class SelectionExplanation:
    candidate_index: int
    rank_score: float
    selected: bool
    dominant_nli_class: str  # "entailment" | "neutral" | "contradiction"
    contradicted: bool  # contradict score > 0.5


def rank_score(policy: RankingPolicy, candidate: ScoredCandidate) -> float:
    """Ranking scalar for one candidate under the policy."""
    if policy.kind == "calibrated":
        if policy.model is None:
            raise InputError("calibrated policy has no model")
        return predict(policy.model, extract_features(candidate, policy.model.feature_set))
    if policy.signal == "QA":
        return candidate.qa_confidence
    if policy.signal == "E":
        return candidate.nli.entail
    if policy.signal == "N":
        return candidate.nli.neutral
    if policy.signal == "C":
        # inverted so the maximum picks the least contradicted answer
        return 1.0 - candidate.nli.contradict
    raise InputError(f"policy has no usable signal: {policy}")


def select_answer(policy: RankingPolicy, record: QuestionRecord) -> list[RankedAnswer]:
    """Score every candidate and mark the argmax (lowest index wins ties)."""
    if not record.candidates:
        raise InputError(f"question {record.question_id!r} has no candidates")
    scores = [rank_score(policy, c) for c in record.candidates]
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return [
        RankedAnswer(candidate_index=i, rank_score=s, selected=(i == best))
        for i, s in enumerate(scores)
    ]


def selected_index(policy: RankingPolicy, record: QuestionRecord) -> int:
    for ranked in select_answer(policy, record):
        if ranked.selected:
            return ranked.candidate_index
    raise InputError("no candidate selected")  # unreachable


def question_confidence(policy: RankingPolicy, record: QuestionRecord) -> float:
    """Confidence that the question is answered correctly.

    Multiple choice: the rank score of the policy-selected candidate.
    Extractive: the rank score of the answer the QA model produced.
    """
    if not record.candidates:
        raise InputError(f"question {record.question_id!r} has no candidates")
    if record.task_kind == MULTIPLE_CHOICE:
        ranked = select_answer(policy, record)
        return next(r.rank_score for r in ranked if r.selected)
    best = max(
        range(len(record.candidates)), key=lambda i: record.candidates[i].qa_confidence
    )
    return rank_score(policy, record.candidates[best])


def dominant_nli_class(candidate: ScoredCandidate) -> str:
    nli = candidate.nli
    scores = {"entailment": nli.entail, "neutral": nli.neutral, "contradiction": nli.contradict}
    return max(scores, key=lambda k: scores[k])


def explain_selection(
    policy: RankingPolicy, record: QuestionRecord
) -> list[SelectionExplanation]:
    """Per-candidate annotations: rank score, dominant NLI class, contradicted flag.

    Knowing that a rejected alternative was contradicted (not merely scored
    lower) is the interpretability payoff of carrying the full NLI triple.
    """
    return [
        SelectionExplanation(
            candidate_index=r.candidate_index,
            rank_score=r.rank_score,
            selected=r.selected,
            dominant_nli_class=dominant_nli_class(record.candidates[r.candidate_index]),
            contradicted=record.candidates[r.candidate_index].nli.contradict > 0.5,
        )
        for r in select_answer(policy, record)
    ]
