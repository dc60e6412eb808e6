"""Corpus scoring: run the models over a QA dataset and emit score records.

The adapter produces the exact JSONL the ranking engine ingests, but owns
none of the evaluation math: hypothesis post-processing is delegated to the
primary CLI's ``postprocess`` command and every produced file is checked with
its ``validate`` command before being published.

Input dataset format (one JSON object per line):

    {"question_id": "q1", "question": "...", "context": "...",
     "choices": ["...", ...], "gold_choice": 2}            # multiple choice
    {"question_id": "q2", "question": "...", "context": "...",
     "gold_spans": ["...", ...]}                           # extractive

``dataset_id`` is optional per row (defaults to the dataset file stem); an
empty ``gold_spans`` list marks an unanswerable question. Questions with an
empty context are skipped and counted, mirroring the engine's load rule.
"""

from __future__ import annotations

import json
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .backends import ModelEndpointConfig, ScoringBackend
from .errors import DatasetSchemaError, RetriableScoringError, ValidationFailure


@dataclass
class DatasetRow:
    question_id: str
    dataset_id: str
    question: str
    context: str
    choices: list[str] | None
    gold_choice: int | None
    gold_spans: list[str] | None

    @property
    def is_multiple_choice(self) -> bool:
        return self.choices is not None


@dataclass
class ScoreResult:
    out_path: Path
    meta_path: Path
    records_written: int
    skipped_empty_context: int


def parse_dataset(path: str | Path, default_dataset_id: str | None = None) -> list[DatasetRow]:
    """Read and schema-check the input dataset. Schema problems are fatal."""
    default_id = default_dataset_id or Path(path).stem
    rows: list[DatasetRow] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetSchemaError(line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise DatasetSchemaError(line_no, "row is not a JSON object")
            try:
                question_id = str(obj["question_id"])
                question = str(obj["question"])
                context = str(obj["context"])
            except KeyError as exc:
                raise DatasetSchemaError(line_no, f"missing field {exc}") from exc
            choices = obj.get("choices")
            gold_choice = obj.get("gold_choice")
            gold_spans = obj.get("gold_spans")
            if choices is not None:
                if not isinstance(choices, list) or len(choices) < 2:
                    raise DatasetSchemaError(line_no, "choices must list at least 2 answers")
                if not isinstance(gold_choice, int) or not (0 <= gold_choice < len(choices)):
                    raise DatasetSchemaError(line_no, "gold_choice out of bounds or missing")
            else:
                if gold_spans is None:
                    raise DatasetSchemaError(
                        line_no, "row needs either choices/gold_choice or gold_spans"
                    )
                if not isinstance(gold_spans, list):
                    raise DatasetSchemaError(line_no, "gold_spans must be a list")
            rows.append(
                DatasetRow(
                    question_id=question_id,
                    dataset_id=str(obj.get("dataset_id", default_id)),
                    question=question,
                    context=context,
                    choices=[str(c) for c in choices] if choices is not None else None,
                    gold_choice=gold_choice if choices is not None else None,
                    gold_spans=[str(s) for s in gold_spans] if gold_spans is not None else None,
                )
            )
    return rows


def _with_retries(fn, question_id: str, retries: int):
    last: Exception | None = None
    for _ in range(retries + 1):
        try:
            return fn()
        except Exception as exc:  # endpoint/model failure: worth retrying
            last = exc
    raise RetriableScoringError(question_id, str(last))


def postprocess_statements(
    pairs: list[tuple[str, str]], primary_cli: str = "contrarank"
) -> list[str]:
    """Run (answer, statement) pairs through the primary's overlap heuristic.

    Delegating keeps the two components byte-identical by construction.
    """
    payload = "".join(
        json.dumps({"answer": answer, "statement": statement}) + "\n"
        for answer, statement in pairs
    )
    proc = subprocess.run(
        [primary_cli, "--quiet", "postprocess"],
        input=payload,
        capture_output=True,
        text=True,
        check=True,
    )
    hypotheses = [json.loads(line)["hypothesis"] for line in proc.stdout.splitlines()]
    if len(hypotheses) != len(pairs):
        raise ValidationFailure(
            f"postprocess returned {len(hypotheses)} lines for {len(pairs)} pairs"
        )
    return hypotheses


def verify_against_primary(path: str | Path, primary_cli: str = "contrarank") -> tuple[bool, str]:
    """Ask the primary CLI to validate a score-record file."""
    proc = subprocess.run(
        [primary_cli, "validate", "--records", str(path)],
        capture_output=True,
        text=True,
    )
    message = (proc.stdout + proc.stderr).strip()
    return proc.returncode == 0, message


def score_corpus(
    dataset_path: str | Path,
    config: ModelEndpointConfig,
    backend: ScoringBackend,
    out_path: str | Path,
    primary_cli: str = "contrarank",
) -> ScoreResult:
    """Score a dataset and publish a validated score-record file.

    Model calls run with bounded concurrency; records are written in input
    order regardless of completion order. The output is refused (left as a
    .rejected file) if the primary's validation fails.
    """
    rows = parse_dataset(dataset_path)
    kept = [row for row in rows if row.context]
    skipped = len(rows) - len(kept)

    workers = max(1, config.batch_size)

    def produce_candidates(row: DatasetRow) -> list[dict]:
        if row.is_multiple_choice:
            scores = _with_retries(
                lambda: backend.mc_scores(row.question, row.context, row.choices),
                row.question_id,
                config.retries,
            )
            answers = list(zip(row.choices, scores))
        else:
            answer, confidence = _with_retries(
                lambda: backend.extract_answer(row.question, row.context),
                row.question_id,
                config.retries,
            )
            answers = [(answer, confidence)]
        candidates = []
        for answer, confidence in answers:
            statement = _with_retries(
                lambda a=answer: backend.qa2d(row.question, a),
                row.question_id,
                config.retries,
            )
            candidates.append(
                {"answer": answer, "qa_confidence": float(confidence), "statement": statement}
            )
        return candidates

    with ThreadPoolExecutor(max_workers=workers) as pool:
        candidate_lists = list(pool.map(produce_candidates, kept))

    # one batched pass through the primary's overlap heuristic
    pairs = [
        (cand["answer"], cand["statement"])
        for candidates in candidate_lists
        for cand in candidates
    ]
    hypotheses = postprocess_statements(pairs, primary_cli)
    cursor = 0
    for candidates in candidate_lists:
        for cand in candidates:
            cand["hypothesis"] = hypotheses[cursor]
            cursor += 1

    def score_nli(args) -> list[tuple[float, float, float]]:
        row, candidates = args
        return [
            _with_retries(
                lambda h=cand["hypothesis"]: backend.nli(row.context, h),
                row.question_id,
                config.retries,
            )
            for cand in candidates
        ]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        nli_lists = list(pool.map(score_nli, zip(kept, candidate_lists)))

    out_path = Path(out_path)
    lines = []
    for row, candidates, triples in zip(kept, candidate_lists, nli_lists):
        if row.is_multiple_choice:
            gold = {"choice_index": row.gold_choice}
        else:
            gold = {"text_spans": row.gold_spans}
        record = {
            "question_id": row.question_id,
            "dataset_id": row.dataset_id,
            "task_kind": "multiple_choice" if row.is_multiple_choice else "extractive",
            "question": row.question,
            "context": row.context,
            "gold": gold,
            "candidates": [
                {
                    "answer": cand["answer"],
                    "hypothesis": cand["hypothesis"],
                    "qa_confidence": cand["qa_confidence"],
                    "nli": {"entail": e, "neutral": n, "contradict": c},
                }
                for cand, (e, n, c) in zip(candidates, triples)
            ],
        }
        lines.append(json.dumps(record))

    pending = out_path.with_suffix(out_path.suffix + ".pending")
    pending.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    ok, message = verify_against_primary(pending, primary_cli)
    if not ok:
        rejected = out_path.with_suffix(out_path.suffix + ".rejected")
        pending.rename(rejected)
        raise ValidationFailure(
            f"primary validation refused the output ({rejected}): {message}"
        )
    pending.rename(out_path)

    meta_path = out_path.with_suffix(out_path.suffix + ".meta.json")
    meta = {
        "qa_model": config.qa_model_id,
        "nli_model": config.nli_model_id,
        "qa2d_model": config.qa2d_model_id,
        "mode": config.mode,
        "decoding": config.decoding_params(),
        "records_written": len(lines),
        "skipped_empty_context": skipped,
        "validation": message,
    }
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return ScoreResult(
        out_path=out_path,
        meta_path=meta_path,
        records_written=len(lines),
        skipped_empty_context=skipped,
    )
