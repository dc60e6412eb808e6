"""Score-record ingestion: parsing, validation, and holdout splitting.

Wire format (one JSON object per line, UTF-8):

    {"question_id": "q1", "dataset_id": "sciq", "task_kind": "multiple_choice",
     "question": "...", "context": "...",
     "gold": {"choice_index": 2} | {"text_spans": ["span", ...]},
     "candidates": [{"answer": "...", "hypothesis": "...",
                     "qa_confidence": 0.9,
                     "nli": {"entail": 0.7, "neutral": 0.2, "contradict": 0.1}}]}

Multiple-choice records carry ``gold.choice_index``; extractive records carry
``gold.text_spans`` (an empty list marks an unanswerable question). Records
with an empty context are skipped at load time and counted in the load
summary; every other invariant violation is a hard error.

A dataset manifest is a single JSON object::

    {"dataset_id": "...", "task_kind": "...", "record_count": N,
     "source_path": "...", "holdout_ids": ["q1", ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    InputError,
    RecordIntegrityError,
    RecordParseError,
    RecordValidationError,
)

MULTIPLE_CHOICE = "multiple_choice"
EXTRACTIVE = "extractive"
TASK_KINDS = (MULTIPLE_CHOICE, EXTRACTIVE)

# Serialized softmax triples arrive rounded; this absorbs 3-decimal rounding
# while still rejecting genuinely unnormalized triples.
NLI_SUM_TOLERANCE = 1e-3

DEFAULT_HOLDOUT_SIZE = 100


@dataclass(frozen=True)
class NliScores:
    """Three-class NLI probabilities for one premise/hypothesis pair."""

    entail: float
    neutral: float
    contradict: float

    def as_dict(self) -> dict:
        return {"entail": self.entail, "neutral": self.neutral, "contradict": self.contradict}


@dataclass(frozen=True)
class ScoredCandidate:
    """One candidate answer with its QA confidence and NLI scores."""

    answer_text: str
    hypothesis_text: str
    qa_confidence: float
    nli: NliScores


@dataclass(frozen=True)
class GoldAnswer:
    """Gold reference: a choice index (multiple choice) or text spans (extractive).

    An extractive gold with zero spans marks an unanswerable question.
    """

    choice_index: int | None = None
    text_spans: tuple[str, ...] = ()


@dataclass(frozen=True)
class QuestionRecord:
    """One question with its context, gold answer, and scored candidates."""

    question_id: str
    dataset_id: str
    task_kind: str
    question_text: str
    context_text: str
    gold: GoldAnswer
    candidates: tuple[ScoredCandidate, ...]

    @property
    def is_unanswerable(self) -> bool:
        return self.task_kind == EXTRACTIVE and len(self.gold.text_spans) == 0


@dataclass
class LoadResult:
    """Records accepted from a file plus the load summary."""

    records: list[QuestionRecord]
    skipped_empty_context: int = 0

    def summary(self) -> str:
        return (
            f"loaded {len(self.records)} records, "
            f"skipped {self.skipped_empty_context} with empty context"
        )


@dataclass
class DatasetManifest:
    """Describes one dataset file and its reserved calibration holdout."""

    dataset_id: str
    task_kind: str
    record_count: int
    source_path: str
    holdout_ids: list[str] = field(default_factory=list)


def validate_record(record: QuestionRecord) -> list[str]:
    """Return every violated invariant for ``record`` (empty list = ok)."""
    violations: list[str] = []
    if record.task_kind not in TASK_KINDS:
        violations.append(f"unknown task_kind {record.task_kind!r}")
    if not record.context_text:
        violations.append("context is empty")
    if len(record.candidates) < 1:
        violations.append("record has no candidates")

    for i, cand in enumerate(record.candidates):
        if not (0.0 <= cand.qa_confidence <= 1.0):
            violations.append(f"candidate {i}: qa_confidence outside [0,1]")
        if not cand.hypothesis_text:
            violations.append(f"candidate {i}: hypothesis is empty")
        nli = cand.nli
        for name, value in nli.as_dict().items():
            if not (0.0 <= value <= 1.0):
                violations.append(f"candidate {i}: nli.{name} outside [0,1]")
        total = nli.entail + nli.neutral + nli.contradict
        if abs(total - 1.0) > NLI_SUM_TOLERANCE:
            violations.append(f"candidate {i}: NLI scores not normalized (sum {total:.4f})")

    if record.task_kind == MULTIPLE_CHOICE:
        idx = record.gold.choice_index
        if idx is None:
            violations.append("multiple_choice record is missing gold.choice_index")
        elif not (0 <= idx < len(record.candidates)):
            violations.append(f"choice index out of bounds ({idx} of {len(record.candidates)})")
    elif record.task_kind == EXTRACTIVE:
        if record.gold.choice_index is not None:
            violations.append("extractive record must not carry gold.choice_index")

    return violations


def _parse_candidate(obj: dict, line_no: int) -> ScoredCandidate:
    try:
        nli_obj = obj["nli"]
        return ScoredCandidate(
            answer_text=str(obj["answer"]),
            hypothesis_text=str(obj["hypothesis"]),
            qa_confidence=float(obj["qa_confidence"]),
            nli=NliScores(
                entail=float(nli_obj["entail"]),
                neutral=float(nli_obj["neutral"]),
                contradict=float(nli_obj["contradict"]),
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordParseError(line_no, f"bad candidate object: {exc}") from exc


def parse_record_line(line: str, line_no: int = 0) -> QuestionRecord:
    """Parse one JSONL line into a QuestionRecord (no invariant checks)."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordParseError(line_no, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise RecordParseError(line_no, "record is not a JSON object")
    try:
        gold_obj = obj.get("gold", {}) or {}
        gold = GoldAnswer(
            choice_index=gold_obj.get("choice_index"),
            text_spans=tuple(str(s) for s in gold_obj.get("text_spans", []) or []),
        )
        return QuestionRecord(
            question_id=str(obj["question_id"]),
            dataset_id=str(obj["dataset_id"]),
            task_kind=str(obj["task_kind"]),
            question_text=str(obj.get("question", "")),
            context_text=str(obj.get("context", "")),
            gold=gold,
            candidates=tuple(_parse_candidate(c, line_no) for c in obj["candidates"]),
        )
    except (KeyError, TypeError) as exc:
        raise RecordParseError(line_no, f"missing or malformed field: {exc}") from exc


def load_records(path: str | Path, task_kind: str | None = None) -> LoadResult:
    """Load and validate a score-record file.

    Records with an empty context are skipped and counted; any other
    invariant violation raises RecordValidationError. Duplicate
    (dataset_id, question_id) pairs raise RecordIntegrityError. When
    ``task_kind`` is given, every record must declare that kind.
    """
    result = LoadResult(records=[])
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = parse_record_line(line, line_no)
            if task_kind is not None and record.task_kind != task_kind:
                raise RecordValidationError(
                    f"line {line_no}: expected task_kind {task_kind!r}, "
                    f"got {record.task_kind!r}"
                )
            if not record.context_text:
                result.skipped_empty_context += 1
                continue
            violations = validate_record(record)
            if violations:
                raise RecordValidationError(
                    f"line {line_no}: invalid record {record.question_id!r}: "
                    + "; ".join(violations),
                    violations=violations,
                )
            key = (record.dataset_id, record.question_id)
            if key in seen:
                raise RecordIntegrityError(
                    f"line {line_no}: duplicate question_id {record.question_id!r} "
                    f"in dataset {record.dataset_id!r}"
                )
            seen.add(key)
            result.records.append(record)
    return result


def parse_records(path: str | Path, task_kind: str | None = None) -> list[QuestionRecord]:
    """Load a record file, returning only the accepted records in file order."""
    return load_records(path, task_kind).records


def record_to_dict(record: QuestionRecord) -> dict:
    """Serialize one record into the wire-format dict."""
    if record.task_kind == MULTIPLE_CHOICE:
        gold: dict = {"choice_index": record.gold.choice_index}
    else:
        gold = {"text_spans": list(record.gold.text_spans)}
    return {
        "question_id": record.question_id,
        "dataset_id": record.dataset_id,
        "task_kind": record.task_kind,
        "question": record.question_text,
        "context": record.context_text,
        "gold": gold,
        "candidates": [
            {
                "answer": c.answer_text,
                "hypothesis": c.hypothesis_text,
                "qa_confidence": c.qa_confidence,
                "nli": c.nli.as_dict(),
            }
            for c in record.candidates
        ],
    }


def records_to_jsonl(records: Iterable[QuestionRecord]) -> str:
    return "".join(json.dumps(record_to_dict(r)) + "\n" for r in records)


def write_records(records: Iterable[QuestionRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_jsonl(records), encoding="utf-8")


def sort_key(record: QuestionRecord) -> tuple[str, str]:
    return (record.dataset_id, record.question_id)


def split_holdout(
    records: list[QuestionRecord],
    n: int = DEFAULT_HOLDOUT_SIZE,
    seed: int = 0,
) -> tuple[list[QuestionRecord], list[QuestionRecord]]:
    """Partition records into (holdout, eval) with exactly ``n`` holdout records.

    The split shuffles id-sorted records with a seeded generator, so it is
    deterministic and invariant under permutation of the input order. Both
    returned lists come back id-sorted.
    """
    if n > len(records):
        raise InputError(f"holdout size {n} exceeds record count {len(records)}")
    if n < 0:
        raise InputError("holdout size must be non-negative")
    ordered = sorted(records, key=sort_key)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ordered))
    holdout_idx = set(perm[:n].tolist())
    holdout = [r for i, r in enumerate(ordered) if i in holdout_idx]
    evaluation = [r for i, r in enumerate(ordered) if i not in holdout_idx]
    return holdout, evaluation


def build_manifest(
    records: list[QuestionRecord],
    source_path: str,
    holdout: list[QuestionRecord] | None = None,
) -> DatasetManifest:
    """Build a manifest for a single-dataset record list."""
    dataset_ids = sorted({r.dataset_id for r in records})
    if len(dataset_ids) != 1:
        raise InputError(f"manifest requires a single dataset, found {dataset_ids}")
    kinds = {r.task_kind for r in records}
    if len(kinds) != 1:
        raise InputError(f"manifest requires a single task kind, found {sorted(kinds)}")
    return DatasetManifest(
        dataset_id=dataset_ids[0],
        task_kind=kinds.pop(),
        record_count=len(records),
        source_path=source_path,
        holdout_ids=sorted(r.question_id for r in (holdout or [])),
    )


def validate_manifest(manifest: DatasetManifest, records: list[QuestionRecord]) -> list[str]:
    """Check a manifest against the records it claims to describe."""
    violations: list[str] = []
    ids = {r.question_id for r in records if r.dataset_id == manifest.dataset_id}
    missing = sorted(set(manifest.holdout_ids) - ids)
    if missing:
        violations.append(f"holdout ids not present in dataset: {missing[:5]}")
    if len(set(manifest.holdout_ids)) != len(manifest.holdout_ids):
        violations.append("holdout ids contain duplicates")
    if manifest.record_count != len(ids):
        violations.append(
            f"record_count {manifest.record_count} does not match dataset size {len(ids)}"
        )
    if manifest.task_kind not in TASK_KINDS:
        violations.append(f"unknown task_kind {manifest.task_kind!r}")
    return violations


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    payload = {
        "dataset_id": manifest.dataset_id,
        "task_kind": manifest.task_kind,
        "record_count": manifest.record_count,
        "source_path": manifest.source_path,
        "holdout_ids": manifest.holdout_ids,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_manifest(path: str | Path) -> DatasetManifest:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return DatasetManifest(
        dataset_id=str(obj["dataset_id"]),
        task_kind=str(obj["task_kind"]),
        record_count=int(obj["record_count"]),
        source_path=str(obj["source_path"]),
        holdout_ids=[str(q) for q in obj.get("holdout_ids", [])],
    )


def apply_manifest_split(
    records: list[QuestionRecord], manifest: DatasetManifest
) -> tuple[list[QuestionRecord], list[QuestionRecord]]:
    """Split records into (holdout, eval) using the manifest's reserved ids."""
    problems = validate_manifest(manifest, records)
    if problems:
        raise RecordIntegrityError("manifest does not match records: " + "; ".join(problems))
    reserved = set(manifest.holdout_ids)
    ordered = sorted(records, key=sort_key)
    holdout = [r for r in ordered if r.question_id in reserved]
    evaluation = [r for r in ordered if r.question_id not in reserved]
    return holdout, evaluation
