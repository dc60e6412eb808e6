"""One-shot report bundle: ranking, selective, rejection, correlation, coefficients.

Records are id-sorted before any computation and the holdout split is keyed
on ids, so every emitted file is byte-identical across runs and across
permutations of the input order. Tables whose prerequisites fail (e.g.
calibration training on a single-class holdout) are skipped with a reason
while the remaining tables are still produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import tables
from .analytics import CORRELATION_SIGNALS, candidate_is_correct, correlation_report
from .calibration import (
    CalibrationModel,
    FeatureSet,
    TrainConfig,
    build_training_examples,
    coefficient_report,
    train_calibration,
)
from .errors import ConfigError, ContrarankError
from .ranking import RankingPolicy, selected_index
from .records import DEFAULT_HOLDOUT_SIZE, QuestionRecord, sort_key, split_holdout
from .rejection import threshold_sweep
from .selective import DEFAULT_COVERAGES, compare_policies

CALIBRATED_SETS = ("QA+E+C", "QA+E", "QA+C", "E+C")
NLI_ONLY_POLICY_ORDER = ("QA", "E+C", "E", "C")
CALIBRATED_POLICY_ORDER = ("QA", "QA+E+C", "QA+E", "QA+C")
SELECTIVE_POLICY_ORDER = ("QA+E+C", "QA+C", "QA+E", "E+C", "E", "C", "QA")
REJECTION_THRESHOLDS = (0.05, 0.10, 0.25, 0.50, 0.75)

SIGNAL_COLUMNS = {
    "qa": "QA",
    "c_score": "C score",
    "c_class": "C class",
    "e_score": "E score",
    "e_class": "E class",
    "n_score": "N score",
    "n_class": "N class",
}


@dataclass
class ReportBundle:
    written: dict = field(default_factory=dict)  # table name -> Path
    skipped: dict = field(default_factory=dict)  # table name -> reason


def _policy_suite(models: dict[str, CalibrationModel], names: Sequence[str]) -> list[RankingPolicy]:
    policies = []
    for name in names:
        if "+" in name:
            policies.append(RankingPolicy.calibrated(models[name]))
        else:
            policies.append(RankingPolicy.single(name))
    return policies


def _ranking_table(
    name: str,
    records: list[QuestionRecord],
    policies: Sequence[RankingPolicy],
) -> tables.Table:
    """Per-dataset accuracy of each policy's selected answer, plus an avg row."""
    by_dataset: dict[str, list[QuestionRecord]] = {}
    for r in records:
        by_dataset.setdefault(r.dataset_id, []).append(r)
    dataset_ids = sorted(by_dataset)

    rows: list[list[tables.Cell]] = []
    accuracies: dict[str, list[float]] = {p.name: [] for p in policies}
    for dataset_id in dataset_ids:
        group = by_dataset[dataset_id]
        row: list[tables.Cell] = [dataset_id]
        for policy in policies:
            correct = sum(
                1 for r in group if candidate_is_correct(r, selected_index(policy, r))
            )
            acc = correct / len(group)
            accuracies[policy.name].append(acc)
            row.append(acc * 100.0)
        rows.append(row)
    avg_row: list[tables.Cell] = ["avg"]
    for policy in policies:
        vals = accuracies[policy.name]
        avg_row.append(sum(vals) / len(vals) * 100.0)
    rows.append(avg_row)
    return tables.Table(name=name, columns=["dataset"] + [p.name for p in policies], rows=rows)


def _selective_table(
    records: list[QuestionRecord],
    policies: Sequence[RankingPolicy],
    coverages: Sequence[float],
    selection: str,
) -> tables.Table:
    grid = compare_policies(records, policies, coverages, selection)
    rows: list[list[tables.Cell]] = []
    for coverage in grid.coverages:
        for dataset_id in grid.dataset_ids + ["avg"]:
            row: list[tables.Cell] = [f"{coverage:g}", dataset_id]
            for name in grid.policy_names:
                row.append(grid.value(coverage, dataset_id, name) * 100.0)
            rows.append(row)
    return tables.Table(
        name=f"selective_{grid.metric_name}",
        columns=["coverage", "dataset"] + list(grid.policy_names),
        rows=rows,
    )


def _rejection_table(records: list[QuestionRecord]) -> tables.Table:
    rows: list[list[tables.Cell]] = []
    for signal, comparator in (("QA", "less_than"), ("E", "less_than"), ("C", "greater_than")):
        for report in threshold_sweep(signal, comparator, REJECTION_THRESHOLDS, records):
            def pct(v: float | None) -> tables.Cell:
                return None if v is None else v * 100.0

            rows.append(
                [
                    report.rule.label,
                    pct(report.rejects),
                    pct(report.accepts),
                    pct(report.precision),
                    pct(report.recall_total),
                    pct(report.f1),
                    pct(report.recall_standard),
                ]
            )
    return tables.Table(
        name="rejection_sweep",
        columns=["rule", "rejects", "accepts", "precision", "recall", "f1", "recall_std"],
        rows=rows,
    )


def _correlation_table(records: list[QuestionRecord], scope: str) -> tables.Table:
    report = correlation_report(records, CORRELATION_SIGNALS, scope=scope)
    by_dataset: dict[str, dict[str, float | None]] = {}
    for row in report.rows:
        by_dataset.setdefault(row.dataset_id, {})[row.signal] = row.rho
    rows: list[list[tables.Cell]] = []
    for dataset_id in sorted(by_dataset):
        cells: list[tables.Cell] = [dataset_id]
        for signal in SIGNAL_COLUMNS:
            cells.append(by_dataset[dataset_id].get(signal))
        rows.append(cells)
    return tables.Table(
        name=f"correlation_{scope}",
        columns=["dataset"] + list(SIGNAL_COLUMNS.values()),
        rows=rows,
    )


def _coefficient_table(models: Sequence[CalibrationModel]) -> tables.Table:
    rows: list[list[tables.Cell]] = []
    for row in coefficient_report(models):
        rows.append(
            [
                row.feature_set_name,
                row.coefficients.get("QA"),
                row.coefficients.get("E"),
                row.coefficients.get("C"),
                row.coefficients.get("N"),
                row.intercept,
                row.holdout_accuracy,
            ]
        )
    return tables.Table(
        name="calibration_coefficients",
        columns=["combination", "QA", "E", "C", "N", "intercept", "holdout_accuracy"],
        rows=rows,
    )


def report_all(
    records: Sequence[QuestionRecord],
    out_dir: str | Path,
    holdout_size: int = DEFAULT_HOLDOUT_SIZE,
    seed: int = 0,
    reg_strength: float = 1.0,
    fmt: str = "markdown",
    coverages: Sequence[float] = DEFAULT_COVERAGES,
    selection: str = "qa",
) -> ReportBundle:
    """Run the full evaluation pipeline on one corpus and write every table."""
    kinds = {r.task_kind for r in records}
    if len(kinds) != 1:
        raise ConfigError(f"report-all needs a single task kind, found {sorted(kinds)}")
    ext = {"markdown": "md", "csv": "csv"}.get(fmt)
    if ext is None:
        raise ConfigError(f"unknown report format {fmt!r}")

    ordered = sorted(records, key=sort_key)
    holdout, evaluation = split_holdout(ordered, holdout_size, seed)
    if not evaluation:
        raise ConfigError("holdout consumed every record; nothing left to evaluate")

    bundle = ReportBundle()
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)

    models: dict[str, CalibrationModel] = {}
    training_error: str | None = None
    try:
        config = TrainConfig(reg_strength=reg_strength)
        for set_name in CALIBRATED_SETS:
            fs = FeatureSet.parse(set_name)
            examples = build_training_examples(holdout, fs)
            dataset_ids = sorted({r.dataset_id for r in holdout})
            models[set_name] = train_calibration(
                examples, fs, config, dataset_id=",".join(dataset_ids)
            )
    except ContrarankError as exc:
        training_error = str(exc)

    def emit(name: str, table: tables.Table) -> None:
        path = out_path / f"{name}.{ext}"
        path.write_text(tables.render(table, fmt), encoding="utf-8")
        bundle.written[name] = path

    def attempt(name: str, build) -> None:
        try:
            emit(name, build())
        except ContrarankError as exc:
            bundle.skipped[name] = str(exc)

    if training_error is None:
        attempt(
            "ranking_nli_only",
            lambda: _ranking_table(
                "ranking_nli_only", evaluation, _policy_suite(models, NLI_ONLY_POLICY_ORDER)
            ),
        )
        attempt(
            "ranking_calibrated",
            lambda: _ranking_table(
                "ranking_calibrated", evaluation, _policy_suite(models, CALIBRATED_POLICY_ORDER)
            ),
        )
        attempt(
            "selective_grid",
            lambda: _selective_table(
                evaluation, _policy_suite(models, SELECTIVE_POLICY_ORDER), coverages, selection
            ),
        )
        attempt("calibration_coefficients", lambda: _coefficient_table(list(models.values())))
    else:
        for name in ("ranking_nli_only", "ranking_calibrated", "selective_grid",
                     "calibration_coefficients"):
            bundle.skipped[name] = f"calibration unavailable: {training_error}"

    if any(r.is_unanswerable for r in evaluation):
        attempt("rejection_sweep", lambda: _rejection_table(evaluation))
    else:
        bundle.skipped["rejection_sweep"] = "corpus has no unanswerable questions"

    attempt("correlation_per_dataset", lambda: _correlation_table(evaluation, "per_dataset"))
    attempt("correlation_pooled", lambda: _correlation_table(evaluation, "pooled"))
    return bundle
