from hypothesis import given, settings
from hypothesis import strategies as st

from contrarank.hypothesis_post import postprocess_hypothesis, token_overlap, tokenize_simple


def test_tokenize_strips_edge_punctuation():
    assert tokenize_simple("The Eiffel Tower.") == ["the", "eiffel", "tower"]


def test_tokenize_empty():
    assert tokenize_simple("") == []


def test_tokenize_keeps_interior_punctuation():
    assert tokenize_simple("co-operate  now") == ["co-operate", "now"]


def test_tokenize_drops_pure_punctuation_tokens():
    assert tokenize_simple("wait -- what?!") == ["wait", "what"]


def test_overlap_full():
    assert token_overlap("Paris", "The capital of France is Paris.").ratio == 1.0


def test_overlap_none():
    # "the" is absent from the statement too, so nothing matches
    result = token_overlap("the Eiffel Tower", "He visited France.")
    assert result.ratio == 0.0
    assert result.answer_tokens == 3
    assert result.matched_tokens == 0


def test_overlap_half_from_pronoun_swap():
    result = token_overlap("she left", "He left early.")
    assert result.ratio == 0.5
    assert (result.answer_tokens, result.matched_tokens) == (2, 1)


def test_overlap_counts_distinct_answer_tokens_once():
    result = token_overlap("very very big", "a big one")
    assert result.answer_tokens == 2  # {very, big}
    assert result.matched_tokens == 1
    assert result.ratio == 0.5


def test_overlap_empty_answer_is_fully_covered():
    assert token_overlap("", "anything").ratio == 1.0
    assert token_overlap("...", "anything").ratio == 1.0


def test_postprocess_appends_when_answer_missing():
    out = postprocess_hypothesis("the Eiffel Tower", "He visited France.")
    assert out == "He visited France. the Eiffel Tower"


def test_postprocess_keeps_statement_with_full_overlap():
    statement = "The capital of France is Paris."
    assert postprocess_hypothesis("Paris", statement) == statement


def test_postprocess_boundary_is_strict():
    # overlap exactly 0.5 is not "less than 50%"
    statement = "He left early."
    assert postprocess_hypothesis("she left", statement) == statement


words = st.lists(
    st.text(alphabet="abcdefg.,!-", min_size=1, max_size=6), min_size=0, max_size=8
).map(" ".join)


@settings(max_examples=300)
@given(answer=words, statement=words)
def test_postprocess_idempotent_and_covered(answer, statement):
    once = postprocess_hypothesis(answer, statement)
    assert postprocess_hypothesis(answer, once) == once
    assert token_overlap(answer, once).ratio >= 0.5


@settings(max_examples=300)
@given(answer=words, statement=words)
def test_postprocess_identity_above_threshold(answer, statement):
    if token_overlap(answer, statement).ratio >= 0.5:
        assert postprocess_hypothesis(answer, statement) == statement
    else:
        assert postprocess_hypothesis(answer, statement) == f"{statement} {answer}"
