"""contrarank-score: produce validated score-record files from a QA dataset."""

from __future__ import annotations

import argparse
import sys

from .backends import ModelEndpointConfig, make_backend
from .errors import AdapterError, DatasetSchemaError, RetriableScoringError, ValidationFailure
from .score import score_corpus, verify_against_primary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contrarank-score",
        description="Run QA, QA2D, and NLI models over a dataset and emit "
        "score records the ranking engine can ingest.",
    )
    sub = parser.add_subparsers(dest="command")

    score = sub.add_parser("score", help="score a dataset (default command)")
    _add_score_args(score)
    score.set_defaults(func=cmd_score)

    verify = sub.add_parser("verify", help="validate an existing score file via the primary")
    verify.add_argument("--records", required=True)
    verify.add_argument("--primary-cli", default="contrarank")
    verify.set_defaults(func=cmd_verify)

    # bare invocation scores: `contrarank-score --dataset ... --out ...`
    _add_score_args(parser)
    parser.set_defaults(func=cmd_score)
    return parser


def _add_score_args(parser) -> None:
    parser.add_argument("--dataset", help="input QA dataset JSONL")
    parser.add_argument("--out", help="output score-record JSONL")
    parser.add_argument("--qa-model", default="stub-qa")
    parser.add_argument("--nli-model", default="stub-nli")
    parser.add_argument("--qa2d-model", default="stub-qa2d")
    parser.add_argument("--mode", choices=["local", "http", "stub"], default="local")
    parser.add_argument("--endpoint", default="", help="inference server base URL (http mode)")
    parser.add_argument("--batch-size", type=int, default=4)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-new-tokens", type=int, default=64)
    parser.add_argument("--num-beams", type=int, default=1)
    parser.add_argument("--retries", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0, help="stub mode determinism seed")
    parser.add_argument("--primary-cli", default="contrarank")


def cmd_score(args) -> int:
    if not args.dataset or not args.out:
        print("error: --dataset and --out are required", file=sys.stderr)
        return 2
    config = ModelEndpointConfig(
        qa_model_id=args.qa_model,
        nli_model_id=args.nli_model,
        qa2d_model_id=args.qa2d_model,
        batch_size=args.batch_size,
        device=args.device,
        mode=args.mode,
        endpoint=args.endpoint,
        max_new_tokens=args.max_new_tokens,
        num_beams=args.num_beams,
        retries=args.retries,
        seed=args.seed,
    )
    backend = make_backend(config)
    result = score_corpus(args.dataset, config, backend, args.out, primary_cli=args.primary_cli)
    print(
        f"wrote {result.records_written} records to {result.out_path} "
        f"(skipped {result.skipped_empty_context} with empty context)",
        file=sys.stderr,
    )
    return 0


def cmd_verify(args) -> int:
    ok, message = verify_against_primary(args.records, args.primary_cli)
    print(message, file=sys.stderr)
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DatasetSchemaError as exc:
        print(f"error: dataset schema: {exc}", file=sys.stderr)
        return 2
    except RetriableScoringError as exc:
        print(f"error: scoring failed (retriable): {exc}", file=sys.stderr)
        return 1
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
