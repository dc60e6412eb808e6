"""Post-processing that guarantees an answer shows up in its hypothesis statement.

Statement generators sometimes drop the answer from the declarative form of a
question/answer pair. When fewer than half of the answer's tokens appear in
the statement, the raw answer is appended to the end. Appending is preferred
over rewriting: some redundancy beats a hypothesis that omits the answer.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

_EDGE_PUNCT = string.punctuation


@dataclass(frozen=True)
class OverlapResult:
    """Token overlap between an answer and a statement.

    ``ratio`` counts each distinct answer token once; an answer with no
    tokens has nothing to match and gets ratio 1.0.
    """

    ratio: float
    answer_tokens: int
    matched_tokens: int


def tokenize_simple(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip edge punctuation from each token.

    Interior punctuation (e.g. "co-operate") is retained. Tokens that are
    pure punctuation disappear.
    """
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_PUNCT)
        if tok:
            tokens.append(tok)
    return tokens


def token_overlap(answer: str, statement: str) -> OverlapResult:
    """Fraction of distinct answer tokens that appear in the statement."""
    answer_set = set(tokenize_simple(answer))
    if not answer_set:
        return OverlapResult(ratio=1.0, answer_tokens=0, matched_tokens=0)
    statement_set = set(tokenize_simple(statement))
    matched = len(answer_set & statement_set)
    return OverlapResult(
        ratio=matched / len(answer_set),
        answer_tokens=len(answer_set),
        matched_tokens=matched,
    )


def postprocess_hypothesis(answer: str, statement: str) -> str:
    """Append the answer to the statement when token overlap is below 50%.

    The boundary is strict: exactly 50% overlap leaves the statement
    untouched. The appended form always reaches full overlap, so the
    operation is idempotent.
    """
    if token_overlap(answer, statement).ratio < 0.5:
        return f"{statement} {answer}"
    return statement
