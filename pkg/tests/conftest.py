import numpy as np
import pytest

from contrarank.records import (
    EXTRACTIVE,
    MULTIPLE_CHOICE,
    GoldAnswer,
    NliScores,
    QuestionRecord,
    ScoredCandidate,
)


def make_candidate(qa=0.5, e=0.4, c=0.3, answer="ans", hypothesis=None) -> ScoredCandidate:
    """Candidate with a normalized NLI triple (neutral fills the rest)."""
    return ScoredCandidate(
        answer_text=answer,
        hypothesis_text=hypothesis or f"statement about {answer}",
        qa_confidence=qa,
        nli=NliScores(entail=e, neutral=1.0 - e - c, contradict=c),
    )


def make_mc_record(qid, scores, gold_index, dataset_id="ds") -> QuestionRecord:
    """scores: list of (qa, entail, contradict) per candidate."""
    return QuestionRecord(
        question_id=qid,
        dataset_id=dataset_id,
        task_kind=MULTIPLE_CHOICE,
        question_text=f"question {qid}",
        context_text=f"context {qid}",
        gold=GoldAnswer(choice_index=gold_index),
        candidates=tuple(make_candidate(qa, e, c, answer=f"{qid}-c{i}")
                         for i, (qa, e, c) in enumerate(scores)),
    )


def make_ext_record(qid, qa, e, c, golds, answer="predicted span", dataset_id="ds") -> QuestionRecord:
    return QuestionRecord(
        question_id=qid,
        dataset_id=dataset_id,
        task_kind=EXTRACTIVE,
        question_text=f"question {qid}",
        context_text=f"context {qid}",
        gold=GoldAnswer(text_spans=tuple(golds)),
        candidates=(make_candidate(qa, e, c, answer=answer),),
    )


def random_mc_record(rng: np.random.Generator, qid, n_candidates=None, dataset_id="fuzz"):
    k = n_candidates or int(rng.integers(1, 6))
    scores = []
    for _ in range(k):
        e, _, c = rng.dirichlet((1.0, 1.0, 1.0))
        scores.append((float(rng.random()), float(e), float(c)))
    return make_mc_record(qid, scores, gold_index=int(rng.integers(0, k)), dataset_id=dataset_id)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
