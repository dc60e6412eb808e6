"""Model backends: local transformers pipelines, an HTTP inference server, or
a deterministic stub.

Every backend answers four questions:

- multiple-choice confidence per choice,
- extractive answer span plus confidence,
- question/answer to declarative statement (QA2D),
- three-class NLI scores for a premise/hypothesis pair.

The stub backend derives every score from stable hashes, so scoring runs are
reproducible without any model and the whole pipeline can be exercised in
tests and demos.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Protocol

from .errors import AdapterError


@dataclass
class ModelEndpointConfig:
    qa_model_id: str = "stub-qa"
    nli_model_id: str = "stub-nli"
    qa2d_model_id: str = "stub-qa2d"
    batch_size: int = 4
    device: str = "cpu"
    mode: str = "local"  # local | http | stub
    endpoint: str = ""  # base URL for http mode
    max_new_tokens: int = 64  # qa2d decoding
    num_beams: int = 1
    retries: int = 2
    seed: int = 0  # stub mode only

    def decoding_params(self) -> dict:
        return {"max_new_tokens": self.max_new_tokens, "num_beams": self.num_beams}


class ScoringBackend(Protocol):
    def mc_scores(self, question: str, context: str, choices: list[str]) -> list[float]: ...

    def extract_answer(self, question: str, context: str) -> tuple[str, float]: ...

    def qa2d(self, question: str, answer: str) -> str: ...

    def nli(self, premise: str, hypothesis: str) -> tuple[float, float, float]: ...


def map_nli_label(label: str) -> str:
    """Normalize a classifier label onto entail / neutral / contradict."""
    lowered = label.lower()
    if lowered.startswith("entail"):
        return "entail"
    if lowered.startswith("neutral"):
        return "neutral"
    if lowered.startswith("contra"):
        return "contradict"
    raise AdapterError(f"unrecognized NLI label {label!r}")


def scores_from_labelled(pairs: list[dict]) -> tuple[float, float, float]:
    """Turn [{label, score}, ...] classifier output into an (e, n, c) triple."""
    by_class = {map_nli_label(p["label"]): float(p["score"]) for p in pairs}
    missing = {"entail", "neutral", "contradict"} - set(by_class)
    if missing:
        raise AdapterError(f"NLI output missing classes: {sorted(missing)}")
    total = sum(by_class.values())
    if total <= 0:
        raise AdapterError("NLI scores sum to zero")
    return (
        by_class["entail"] / total,
        by_class["neutral"] / total,
        by_class["contradict"] / total,
    )


# --- deterministic stub ---------------------------------------------------


def _unit_hash(*parts) -> float:
    """Stable float in [0, 1) derived from the argument strings."""
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


@dataclass
class StubBackend:
    """Deterministic scores from hashes; no models involved."""

    seed: int = 0

    def mc_scores(self, question, context, choices):
        raw = [_unit_hash(self.seed, "mc", question, context, c) for c in choices]
        exps = [math.exp(3 * r) for r in raw]
        total = sum(exps)
        return [e / total for e in exps]

    def extract_answer(self, question, context):
        words = context.split() or ["unknown"]
        start = int(_unit_hash(self.seed, "span", question) * len(words))
        length = 1 + int(_unit_hash(self.seed, "len", question) * 3)
        answer = " ".join(words[start : start + length]) or words[-1]
        return answer, _unit_hash(self.seed, "conf", question, answer)

    def qa2d(self, question, answer):
        # half the time the statement drops the answer, exercising the
        # downstream overlap heuristic
        stem = question.rstrip("?").strip() or "it"
        if _unit_hash(self.seed, "drop", question, answer) < 0.5:
            return f"{stem} is known."
        return f"{stem} is {answer}."

    def nli(self, premise, hypothesis):
        raw = [
            0.05 + _unit_hash(self.seed, "nli", klass, premise, hypothesis)
            for klass in ("e", "n", "c")
        ]
        total = sum(raw)
        e, n = raw[0] / total, raw[1] / total
        return e, n, 1.0 - e - n


# --- HTTP inference server -------------------------------------------------


class HttpBackend:
    """Client for an inference server exposing text-classification (NLI),
    text-generation (QA2D), question-answering, and a multiple-choice scoring
    extension under /models/{model_id}.
    """

    def __init__(self, config: ModelEndpointConfig):
        import requests

        if not config.endpoint:
            raise AdapterError("http mode needs --endpoint")
        self._session = requests.Session()
        self._config = config
        self._base = config.endpoint.rstrip("/")

    def _post(self, model_id: str, payload: dict) -> dict | list:
        response = self._session.post(f"{self._base}/models/{model_id}", json=payload, timeout=60)
        response.raise_for_status()
        return response.json()

    def mc_scores(self, question, context, choices):
        out = self._post(
            self._config.qa_model_id,
            {"inputs": {"question": question, "context": context, "choices": choices}},
        )
        scores = [float(s) for s in out["scores"]]
        if len(scores) != len(choices):
            raise AdapterError(f"server returned {len(scores)} scores for {len(choices)} choices")
        return scores

    def extract_answer(self, question, context):
        out = self._post(
            self._config.qa_model_id, {"inputs": {"question": question, "context": context}}
        )
        return str(out["answer"]), float(out["score"])

    def qa2d(self, question, answer):
        out = self._post(
            self._config.qa2d_model_id,
            {
                "inputs": f"question: {question} answer: {answer}",
                "parameters": self._config.decoding_params(),
            },
        )
        return str(out[0]["generated_text"])

    def nli(self, premise, hypothesis):
        out = self._post(
            self._config.nli_model_id,
            {"inputs": {"text": premise, "text_pair": hypothesis}},
        )
        pairs = out[0] if out and isinstance(out[0], list) else out
        return scores_from_labelled(list(pairs))


# --- local transformers pipelines -------------------------------------------


class LocalTransformersBackend:
    """Runs the models in-process via transformers pipelines.

    Imports lazily so the adapter installs without torch; pass
    ``pip install contrarank-scorer-adapter[local]`` to use this mode.
    """

    def __init__(self, config: ModelEndpointConfig):
        try:
            import torch
            from transformers import (
                AutoModelForMultipleChoice,
                AutoTokenizer,
                pipeline,
            )
        except ImportError as exc:  # pragma: no cover - environment dependent
            raise AdapterError(
                "local mode needs the [local] extra (transformers + torch)"
            ) from exc
        self._torch = torch
        self._config = config
        device = -1 if config.device == "cpu" else config.device
        self._qa = pipeline("question-answering", model=config.qa_model_id, device=device)
        self._qa2d = pipeline("text2text-generation", model=config.qa2d_model_id, device=device)
        self._nli = pipeline(
            "text-classification", model=config.nli_model_id, top_k=None, device=device
        )
        self._mc_tokenizer = AutoTokenizer.from_pretrained(config.qa_model_id)
        self._mc_model = AutoModelForMultipleChoice.from_pretrained(config.qa_model_id)
        self._mc_model.eval()

    def mc_scores(self, question, context, choices):
        torch = self._torch
        firsts = [f"{context} {question}" for _ in choices]
        encoded = self._mc_tokenizer(
            firsts, list(choices), return_tensors="pt", padding=True, truncation=True
        )
        batch = {k: v.unsqueeze(0) for k, v in encoded.items()}
        with torch.no_grad():
            logits = self._mc_model(**batch).logits[0]
        return torch.softmax(logits, dim=-1).tolist()

    def extract_answer(self, question, context):
        out = self._qa(question=question, context=context)
        return str(out["answer"]), float(out["score"])

    def qa2d(self, question, answer):
        out = self._qa2d(
            f"question: {question} answer: {answer}", **self._config.decoding_params()
        )
        return str(out[0]["generated_text"])

    def nli(self, premise, hypothesis):
        out = self._nli({"text": premise, "text_pair": hypothesis})
        pairs = out[0] if out and isinstance(out[0], list) else out
        return scores_from_labelled(list(pairs))


def make_backend(config: ModelEndpointConfig) -> ScoringBackend:
    if config.mode == "stub":
        return StubBackend(seed=config.seed)
    if config.mode == "http":
        return HttpBackend(config)
    if config.mode == "local":
        return LocalTransformersBackend(config)
    raise AdapterError(f"unknown mode {config.mode!r}")
