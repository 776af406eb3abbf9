"""Command line frontend: train, classify, eval, serve, repl.

Exit codes: 0 success, 1 bad usage, 2 I/O or file-format trouble,
3 invalid or untrainable model.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

from .errors import (
    BadFormat,
    DegenerateCorpus,
    EmptyCorpus,
    EmptyQuery,
    EmptyTestSet,
    InvalidModel,
    InvariantViolation,
    MalformedRow,
    MissingColumn,
    NoPositiveWeight,
    TableFormatError,
    UsageError,
)
from .evaluation import (
    IRRELEVANT,
    InjectionSpec,
    evaluate,
    read_test_cases,
    table2_experiment,
)
from .inference import Ambiguous, Answered, classify
from .model import (
    InaModel,
    ModelConfig,
    ingest_corpus,
    load_model,
    save_model,
    train,
)
from .preprocess import LemmaTable, SynonymTable

_IO_ERRORS = (
    OSError,
    BadFormat,
    TableFormatError,
    MissingColumn,
    MalformedRow,
    EmptyCorpus,
    EmptyTestSet,
    EmptyQuery,
)
_MODEL_ERRORS = (InvariantViolation, InvalidModel, NoPositiveWeight, DegenerateCorpus)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A002 - argparse API
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ina", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_train = sub.add_parser("train", help="train a model from a CSV corpus")
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--synonyms")
    p_train.add_argument("--lemmas")
    p_train.add_argument("--window", type=int, default=2)
    p_train.add_argument("--alpha", type=float, default=2.0)
    p_train.add_argument("--threshold", type=float, default=0.6)
    p_train.add_argument("--band", type=float, default=0.05)
    p_train.add_argument("--max-candidates", type=int, default=5)
    p_train.add_argument("--discount-stage", choices=["post", "pre"], default="post")

    p_classify = sub.add_parser("classify", help="classify one query")
    p_classify.add_argument("--model", required=True)
    p_classify.add_argument("--text", required=True)
    p_classify.add_argument("--json", action="store_true")

    p_eval = sub.add_parser("eval", help="evaluate a model on a CSV test set")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--test", required=True)
    p_eval.add_argument("--inject", type=float)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--mode", choices=["strict", "lenient"], default="lenient")
    p_eval.add_argument("--json", action="store_true")

    p_serve = sub.add_parser("serve", help="serve the HTTP API")
    p_serve.add_argument("--model", required=True)
    p_serve.add_argument("--addr", default="127.0.0.1:8000")
    p_serve.add_argument("--feedback-log")

    p_repl = sub.add_parser("repl", help="interactive query loop")
    p_repl.add_argument("--model", required=True)
    p_repl.add_argument("--feedback-log")

    return parser


def _cmd_train(args) -> int:
    synonyms = SynonymTable.load(args.synonyms) if args.synonyms else SynonymTable()
    lemmas = LemmaTable.load(args.lemmas) if args.lemmas else LemmaTable()
    try:
        config = ModelConfig(
            alpha_f=args.alpha,
            window=args.window,
            threshold=args.threshold,
            ambiguity_band=args.band,
            max_candidates=args.max_candidates,
            discount_stage="pre_activation" if args.discount_stage == "pre" else "post_activation",
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    examples = ingest_corpus(args.corpus)
    model = train(examples, config, synonyms, lemmas)
    save_model(model, args.out)
    print(
        f"trained {len(examples)} examples, {model.stats.classes} classes, "
        f"{len(model.feature_index)} features -> {args.out}"
    )
    return 0


def _breakdown_payload(breakdown) -> dict:
    assert breakdown.confidence is not None
    return {
        label: {
            "raw": breakdown.raw[label],
            "sm": breakdown.sm[label],
            "relu_norm": breakdown.relu_norm[label],
            "tanh": breakdown.tanh_comp[label],
            "ai": breakdown.ai[label],
            "confidence": breakdown.confidence[label],
        }
        for label in breakdown.classes
    }


def _cmd_classify(args) -> int:
    model = load_model(args.model)
    analysis, breakdown, decision = classify(args.text, model)
    if args.json:
        payload: dict = {
            "unknown_count": analysis.unknown_count,
            "discount": breakdown.discount,
            "breakdown": _breakdown_payload(breakdown),
        }
        if isinstance(decision, Answered):
            payload.update(
                status="answered", **{"class": decision.label}, confidence=decision.confidence
            )
        elif isinstance(decision, Ambiguous):
            payload.update(
                status="ambiguous",
                **{"class": None},
                confidence=decision.candidates[0].confidence,
                candidates=[
                    {
                        "class": cand.label,
                        "confidence": cand.confidence,
                        "example_query": cand.representative,
                    }
                    for cand in decision.candidates
                ],
            )
        else:
            payload.update(
                status="rejected", **{"class": None}, confidence=decision.best_confidence
            )
        print(json.dumps(payload, sort_keys=True, ensure_ascii=False))
        return 0
    _print_decision(decision)
    return 0


def _print_decision(decision) -> None:
    if isinstance(decision, Answered):
        print(f"class {decision.label} (CL={decision.confidence:.4f})")
    elif isinstance(decision, Ambiguous):
        print(f"ambiguous between {len(decision.candidates)} classes:")
        for i, cand in enumerate(decision.candidates, start=1):
            print(f"{i}) {cand.label}: {cand.representative!r} (CL={cand.confidence:.4f})")
    else:
        print(f"no confident answer (best CL={decision.best_confidence:.4f})")


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    cases = read_test_cases(args.test)
    if args.inject is None:
        report = evaluate(model, cases, args.mode)
        print(json.dumps(report.as_dict(), sort_keys=True) if args.json else report.render())
        return 0
    relevant = [c for c in cases if c.expected != IRRELEVANT]
    irrelevant = [c for c in cases if c.expected == IRRELEVANT]
    basic = model.with_alpha(0.0)
    try:
        spec = InjectionSpec(args.inject, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = table2_experiment(basic, model, relevant, spec, irrelevant, args.mode)
    print(table.to_json() if args.json else table.render())
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.addr.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"--addr must be HOST:PORT, got {args.addr!r}")
    model = load_model(args.model)
    app = create_app(model, feedback_log=args.feedback_log)
    uvicorn.run(app, host=host, port=int(port))
    return 0


def _append_feedback(path, record: dict) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def _cmd_repl(args) -> int:
    model = load_model(args.model)
    print("type a query; 'exit' quits")
    while True:
        try:
            line = input("> ")
        except EOFError:
            return 0
        query = line.strip()
        if not query:
            continue
        if query == "exit":
            return 0
        _, _, decision = classify(query, model)
        _print_decision(decision)
        if not isinstance(decision, Ambiguous):
            continue
        k = len(decision.candidates)
        while True:
            try:
                pick = input(f"pick 1-{k}: ").strip()
            except EOFError:
                return 0
            if pick.isdigit() and 1 <= int(pick) <= k:
                chosen = decision.candidates[int(pick) - 1]
                break
            print(f"please enter a number between 1 and {k}")
        print(f"class {chosen.label}")
        if args.feedback_log:
            _append_feedback(
                args.feedback_log,
                {
                    "ts": datetime.now(timezone.utc).isoformat(),
                    "query": query,
                    "candidates": [
                        {"class": c.label, "confidence": c.confidence}
                        for c in decision.candidates
                    ],
                    "chosen_class": chosen.label,
                },
            )


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        handler = {
            "train": _cmd_train,
            "classify": _cmd_classify,
            "eval": _cmd_eval,
            "serve": _cmd_serve,
            "repl": _cmd_repl,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except _IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _MODEL_ERRORS as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return code if isinstance(code, int) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
