"""Command-line interface.

Exit codes: 0 success, 1 data validation failure, 2 configuration error,
3 degenerate calibration training.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import reportall, tables
from .analytics import CORRELATION_SIGNALS, correlation_report
from .calibration import (
    FeatureSet,
    TrainConfig,
    build_training_examples,
    load_model,
    save_model,
    train_calibration,
)
from .errors import (
    ConfigError,
    ContrarankError,
    DegenerateTrainingError,
    InputError,
    RecordIntegrityError,
    RecordParseError,
    RecordValidationError,
)
from .hypothesis_post import postprocess_hypothesis
from .ranking import RankingPolicy, explain_selection, select_answer
from .records import (
    DEFAULT_HOLDOUT_SIZE,
    apply_manifest_split,
    build_manifest,
    load_records,
    read_manifest,
    split_holdout,
    write_manifest,
    write_records,
)
from .rejection import RejectionRule, threshold_sweep
from .reportall import _selective_table
from .synth import SynthSpec, generate_synthetic

OUT_DIR_ENV = "CONTRARANK_OUT_DIR"


def _parse_policy(spec: str) -> RankingPolicy:
    if spec.startswith("calibrated:"):
        path = spec.split(":", 1)[1]
        if not path:
            raise ConfigError("calibrated policy needs a model path: calibrated:PATH")
        return RankingPolicy.calibrated(load_model(path))
    if spec.lower() in ("qa", "e", "c", "n"):
        return RankingPolicy.single(spec)
    raise ConfigError(f"unknown policy {spec!r} (expected qa|e|c|n|calibrated:PATH)")


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"{flag} expects a comma-separated number list: {exc}") from exc
    if not values:
        raise ConfigError(f"{flag} is empty")
    return values


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _table_format(args) -> str:
    if args.format not in ("markdown", "csv"):
        raise ConfigError("table commands emit markdown or csv; use --format accordingly")
    return args.format


def _load(args, task_kind: str | None = None):
    result = load_records(args.records, task_kind)
    if not args.quiet and result.skipped_empty_context:
        print(result.summary(), file=sys.stderr)
    return result.records


def cmd_validate(args) -> int:
    result = load_records(args.records)
    print(result.summary())
    return 0


def cmd_postprocess(args) -> int:
    source = open(args.infile, encoding="utf-8") if args.infile else sys.stdin
    sink = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for line_no, line in enumerate(source, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                answer, statement = obj["answer"], obj["statement"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise RecordParseError(line_no, f"expected {{answer, statement}}: {exc}") from exc
            hypothesis = postprocess_hypothesis(answer, statement)
            sink.write(json.dumps({"hypothesis": hypothesis}) + "\n")
    finally:
        if args.infile:
            source.close()
        if args.out:
            sink.close()
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(
        n_questions=args.n_questions,
        candidates_per_question=args.candidates,
        task_kind=args.task,
        qa_weight=args.qa_weight,
        e_weight=args.e_weight,
        c_weight=args.c_weight,
        intercept=args.intercept,
        seed=args.seed,
        unanswerable_fraction=args.unanswerable_frac,
        dataset_id=args.dataset_id,
    )
    records = generate_synthetic(spec)
    write_records(records, args.out)
    if not args.quiet:
        print(f"wrote {len(records)} records to {args.out}", file=sys.stderr)
    if args.manifest_out:
        holdout, _ = split_holdout(records, min(args.holdout_size, len(records)), args.seed)
        manifest = build_manifest(records, source_path=str(args.out), holdout=holdout)
        write_manifest(manifest, args.manifest_out)
    return 0


def cmd_calibrate(args) -> int:
    records = _load(args)
    if args.manifest:
        manifest = read_manifest(args.manifest)
        holdout, _ = apply_manifest_split(records, manifest)
    else:
        holdout, _ = split_holdout(records, args.holdout_size, args.seed)
    config = TrainConfig(reg_strength=args.reg_strength)
    dataset_ids = ",".join(sorted({r.dataset_id for r in holdout}))

    specs = args.features or ["QA+E+C"]
    models = []
    for spec in specs:
        fs = FeatureSet.parse(spec)
        examples = build_training_examples(holdout, fs)
        models.append(train_calibration(examples, fs, config, dataset_id=dataset_ids))

    out = Path(args.out)
    if len(models) == 1 and out.suffix == ".json":
        save_model(models[0], out)
    else:
        out.mkdir(parents=True, exist_ok=True)
        for model in models:
            slug = model.feature_set.name.lower().replace("+", "_")
            save_model(model, out / f"calibration_{slug}.json")
    if not args.quiet:
        table = reportall._coefficient_table(models)
        sys.stderr.write(tables.render(table, "markdown"))
    return 0


def cmd_rank(args) -> int:
    policy = _parse_policy(args.policy)
    records = _load(args)
    lines = []
    for record in records:
        payload = {
            "question_id": record.question_id,
            "dataset_id": record.dataset_id,
            "policy": policy.name,
            "ranked": [
                {
                    "candidate_index": r.candidate_index,
                    "rank_score": r.rank_score,
                    "selected": r.selected,
                }
                for r in select_answer(policy, record)
            ],
        }
        if args.explain:
            payload["explanations"] = [
                {
                    "candidate_index": e.candidate_index,
                    "rank_score": e.rank_score,
                    "selected": e.selected,
                    "dominant_nli_class": e.dominant_nli_class,
                    "contradicted": e.contradicted,
                }
                for e in explain_selection(policy, record)
            ]
        lines.append(json.dumps(payload))
    _write_or_print("".join(line + "\n" for line in lines), args.out)
    return 0


def cmd_selective(args) -> int:
    records = _load(args)
    policies = [_parse_policy(p) for p in args.policies.split(",") if p.strip()]
    if not policies:
        raise ConfigError("--policies is empty")
    coverages = _parse_float_list(args.coverages, "--coverages")
    table = _selective_table(records, policies, coverages, args.selection)
    _write_or_print(tables.render(table, _table_format(args)), args.out)
    return 0


def cmd_reject(args) -> int:
    records = _load(args)
    signal = args.signal.upper()
    comparator = {"lt": "less_than", "gt": "greater_than"}[args.comparator]
    thresholds = _parse_float_list(args.thresholds, "--thresholds")
    probe = RejectionRule(signal=signal, comparator=comparator, threshold=thresholds[0])
    if not probe.is_conventional and not args.quiet:
        print(
            f"warning: unconventional rule direction {probe.label!r}; "
            "QA and E usually reject below a threshold, C above",
            file=sys.stderr,
        )
    reports = threshold_sweep(signal, comparator, thresholds, records)

    def pct(v):
        return None if v is None else v * 100.0

    rows = [
        [
            r.rule.label,
            pct(r.rejects),
            pct(r.accepts),
            pct(r.precision),
            pct(r.recall_total),
            pct(r.f1),
            pct(r.recall_standard),
        ]
        for r in reports
    ]
    table = tables.Table(
        name="rejection",
        columns=["rule", "rejects", "accepts", "precision", "recall", "f1", "recall_std"],
        rows=rows,
    )
    _write_or_print(tables.render(table, _table_format(args)), args.out)
    return 0


def cmd_correlate(args) -> int:
    records = _load(args)
    scope = args.scope.replace("-", "_")
    if args.signals == "all":
        signals = list(CORRELATION_SIGNALS)
    else:
        signals = [s.strip().lower() for s in args.signals.split(",") if s.strip()]
    report = correlation_report(records, signals, scope=scope, answered_only=args.answered_only)
    by_dataset: dict[str, dict] = {}
    for row in report.rows:
        by_dataset.setdefault(row.dataset_id, {})[row.signal] = row.rho
    rows = [
        [dataset_id] + [by_dataset[dataset_id].get(s) for s in signals]
        for dataset_id in sorted(by_dataset)
    ]
    table = tables.Table(name=f"correlation_{scope}", columns=["dataset"] + signals, rows=rows)
    _write_or_print(tables.render(table, _table_format(args)), args.out)
    return 0


def cmd_report_all(args) -> int:
    records = _load(args)
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV) or "reports"
    bundle = reportall.report_all(
        records,
        out_dir,
        holdout_size=args.holdout_size,
        seed=args.seed,
        reg_strength=args.reg_strength,
        fmt=_table_format(args),
        coverages=_parse_float_list(args.coverages, "--coverages"),
        selection=args.selection,
    )
    if not args.quiet:
        for name, path in sorted(bundle.written.items()):
            print(f"wrote {path}", file=sys.stderr)
        for name, reason in sorted(bundle.skipped.items()):
            print(f"skipped {name}: {reason}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contrarank",
        description="Answer ranking, calibration, and selective-QA evaluation "
        "over QA and NLI confidence scores.",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    parser.add_argument(
        "--format",
        choices=["markdown", "csv", "jsonl"],
        default="markdown",
        help="table output format (rank/postprocess always emit JSONL)",
    )
    parser.add_argument(
        "--out-dir",
        default=None,
        help=f"output directory for report-all (default: ${OUT_DIR_ENV} or ./reports)",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress messages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a score-record file")
    p.add_argument("--records", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("postprocess", help="append answers to low-overlap statements")
    p.add_argument("--in", dest="infile", default=None, help="JSONL of {answer, statement}")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("synth", help="generate a synthetic score corpus")
    p.add_argument("--task", choices=["multiple_choice", "extractive"], default="multiple_choice")
    p.add_argument("--n-questions", type=int, required=True)
    p.add_argument("--candidates", type=int, default=4)
    p.add_argument("--qa-weight", type=float, default=3.0)
    p.add_argument("--e-weight", type=float, default=1.5)
    p.add_argument("--c-weight", type=float, default=-1.2)
    p.add_argument("--intercept", type=float, default=-0.5)
    p.add_argument("--unanswerable-frac", type=float, default=0.0)
    p.add_argument("--dataset-id", default="synth")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest-out", default=None)
    p.add_argument("--holdout-size", type=int, default=DEFAULT_HOLDOUT_SIZE)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("calibrate", help="train calibration models")
    p.add_argument("--records", required=True)
    p.add_argument(
        "--features",
        action="append",
        help="feature subset like QA+E+C (repeat for several models)",
    )
    p.add_argument("--holdout-size", type=int, default=DEFAULT_HOLDOUT_SIZE)
    p.add_argument("--reg-strength", type=float, default=1.0)
    p.add_argument("--manifest", default=None, help="use this manifest's reserved holdout ids")
    p.add_argument("--out", required=True, help="model JSON path, or directory for several")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("rank", help="rank candidates and select answers")
    p.add_argument("--policy", required=True, help="qa|e|c|n|calibrated:PATH")
    p.add_argument("--records", required=True)
    p.add_argument("--explain", action="store_true", help="annotate non-selected candidates")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("selective", help="coverage-vs-metric grid for several policies")
    p.add_argument("--records", required=True)
    p.add_argument("--policies", required=True, help="comma list of qa|e|c|n|calibrated:PATH")
    p.add_argument("--coverages", default="0.2,0.5")
    p.add_argument("--selection", choices=["qa", "policy"], default="qa")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_selective)

    p = sub.add_parser("reject", help="threshold-rule rejection sweep")
    p.add_argument("--records", required=True)
    p.add_argument("--signal", choices=["qa", "e", "c"], required=True)
    p.add_argument("--comparator", choices=["lt", "gt"], required=True)
    p.add_argument("--thresholds", default="0.05,0.10,0.25,0.50")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reject)

    p = sub.add_parser("correlate", help="signal-vs-correctness rank correlations")
    p.add_argument("--records", required=True)
    p.add_argument("--scope", choices=["per-dataset", "pooled"], default="per-dataset")
    p.add_argument("--signals", default="all", help='"all" or comma list like qa,c_score,c_class')
    p.add_argument("--answered-only", action="store_true",
                   help="extractive: drop unanswerable questions from the series")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("report-all", help="emit the full table bundle for one corpus")
    p.add_argument("--records", required=True)
    p.add_argument("--holdout-size", type=int, default=DEFAULT_HOLDOUT_SIZE)
    p.add_argument("--reg-strength", type=float, default=1.0)
    p.add_argument("--coverages", default="0.2,0.5")
    p.add_argument("--selection", choices=["qa", "policy"], default="qa")
    p.set_defaults(func=cmd_report_all)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # the reader went away (e.g. output piped into head); not an error
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 0
    except (RecordParseError, RecordValidationError, RecordIntegrityError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DegenerateTrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ContrarankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
