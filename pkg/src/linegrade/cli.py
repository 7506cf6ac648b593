"""Command-line surface for teachers and CI.

Subcommands: ``test`` (debug a pattern against candidate answers),
``analyze`` (per-template metrics for a bank), ``grade`` (batch-grade a
CSV of responses), ``serve`` (run the HTTP practice service).

Exit codes: 0 ok, 1 assertion-style failures (e.g. a non-matching answer
line), 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import os
import socket
import statistics
import sys

from .analysis import PatternMetrics
from .engine import compile_template, match_partial
from .errors import PatternSyntaxError, TemplateError
from .hints import shortest_completion
from .questions import confusion_metrics, grade_response, load_bank
from .service import DEFAULT_PORT, PORT_ENV_VAR, create_app


class Painter:
    """ANSI color helper; disabled when not writing to a terminal."""

    def __init__(self, enabled: bool):
        self.enabled = enabled

    def _wrap(self, code: str, text: str) -> str:
        if not self.enabled or not text:
            return text
        return f"\x1b[{code}m{text}\x1b[0m"

    def green(self, text: str) -> str:
        return self._wrap("32", text)

    def red(self, text: str) -> str:
        return self._wrap("31;1", text)

    def yellow(self, text: str) -> str:
        return self._wrap("33", text)


def _load_bank_file(path: str):
    try:
        with open(path, "rb") as fh:
            return load_bank(fh.read())
    except OSError as err:
        raise TemplateError(f"cannot read bank {path!r}: {err}") from err


def cmd_test(args, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    if args.pattern is not None:
        pattern = args.pattern
    else:
        try:
            with open(args.pattern_file, encoding="utf-8") as fh:
                pattern = fh.read().rstrip("\n")
        except OSError as exc:
            print(f"error: {exc}", file=err)
            return 2
    try:
        compiled = compile_template(pattern)
    except PatternSyntaxError as exc:
        print(f"syntax error at offset {exc.position}: {exc.message}", file=err)
        return 2
    except TemplateError as exc:
        print(f"error: {exc}", file=err)
        return 2
    try:
        with open(args.answers_file, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 2
    paint = Painter(not args.no_color and out.isatty())
    all_full = True
    for line in lines:
        result = match_partial(compiled, line)
        k = result.matched_prefix_len
        if result.is_full:
            mark, label = "+", "full"
        else:
            all_full = False
            mark = "x"
            label = "viable-prefix" if result.prefix_complete else "partial"
        rendered = paint.green(line[:k]) + paint.red(line[k:])
        row = f"{mark} {rendered}  [{label}"
        if not result.is_full:
            row += f", matched {k}/{result.input_len}"
        row += "]"
        if args.hints and not result.is_full:
            try:
                completion = shortest_completion(compiled, line)
                row += f"  hint: keep {completion.prefix_len} chars, append {paint.yellow(completion.text)!s}"
            except TemplateError as exc:
                row += f"  hint unavailable: {exc}"
        print(row, file=out)
    return 0 if all_full else 1


def _summary_rows(metrics: list[PatternMetrics]):
    def stats(values):
        return (
            min(values),
            max(values),
            statistics.mean(values),
            statistics.pstdev(values),
        )

    return [
        ("characters in answer", *stats([m.shortest_answer_chars for m in metrics])),
        ("tokens in answer", *stats([m.shortest_answer_tokens for m in metrics])),
        ("paths through the expression", *stats([m.path_count for m in metrics])),
    ]


def cmd_analyze(args, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        bank = _load_bank_file(args.bank)
    except TemplateError as exc:
        print(f"error: {exc}", file=err)
        return 2
    metrics: list[PatternMetrics] = []
    for question in bank:
        print(f"question {question.id}: {len(question.answers)} answer template(s)", file=out)
        for template in question.answers:
            m = template.metrics
            metrics.append(m)
            flags = []
            if m.uses_recursion:
                flags.append("recursion")
            if m.uses_backreferences:
                flags.append("backrefs")
            if m.capture_group_count:
                flags.append(f"{m.capture_group_count} group(s)")
            detail = f" ({', '.join(flags)})" if flags else ""
            print(
                f"  [{template.answer_id}] fraction {template.fraction:g}: "
                f"chars {m.shortest_answer_chars}, tokens {m.shortest_answer_tokens}, "
                f"paths {m.path_count}{detail}",
                file=out,
            )
    if not metrics:
        print("bank has no templates", file=err)
        return 2
    print("", file=out)
    print(f"{'Parameter':<30}{'Min':>6}{'Max':>6}{'Mean':>9}{'Stdev':>9}", file=out)
    for name, mn, mx, mean, stdev in _summary_rows(metrics):
        print(f"{name:<30}{mn:>6}{mx:>6}{mean:>9.2f}{stdev:>9.2f}", file=out)
    return 0


def cmd_grade(args, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        bank = _load_bank_file(args.bank)
    except TemplateError as exc:
        print(f"error: {exc}", file=err)
        return 2
    rows = []
    try:
        with open(args.responses, newline="", encoding="utf-8") as fh:
            for row_no, row in enumerate(csv.reader(fh), start=1):
                if not row:
                    continue
                if len(row) not in (2, 3):
                    print(f"error: row {row_no}: expected 2 or 3 fields", file=err)
                    return 2
                question_id, text = row[0], row[1]
                label = row[2].strip() if len(row) == 3 else ""
                if label not in ("", "correct", "incorrect"):
                    print(f"error: row {row_no}: label must be correct/incorrect", file=err)
                    return 2
                if bank.get(question_id) is None:
                    print(f"error: row {row_no}: unknown question id {question_id!r}", file=err)
                    return 2
                rows.append((row_no, question_id, text, label))
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 2
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["question_id", "text", "verdict", "matched_prefix_len", "fraction", "matched_answer_id"]
    )
    labeled = []
    for _row_no, question_id, text, label in rows:
        question = bank.get(question_id)
        result = grade_response(question, text)
        writer.writerow(
            [
                question_id,
                text,
                result.match.verdict.value,
                result.match.matched_prefix_len,
                f"{result.final_fraction:g}",
                "" if result.matched_answer_id is None else result.matched_answer_id,
            ]
        )
        if label:
            labeled.append((text, label == "correct", result.matched_answer_id is not None))
    if args.metrics:
        if not labeled:
            print("metrics requested but no labeled rows", file=err)
            return 2
        m = confusion_metrics(labeled)

        def fmt(v):
            return "undefined" if v is None else f"{v:.3f}"

        print(
            f"precision={fmt(m.precision)} recall={fmt(m.recall)} f1={fmt(m.f_measure)}",
            file=err,
        )
    return 0


def cmd_serve(args, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    import uvicorn

    try:
        bank = _load_bank_file(args.bank)
    except TemplateError as exc:
        print(f"error: {exc}", file=err)
        return 2
    port = args.port
    if port is None:
        port = int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((args.host, port))
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{port}: {exc}", file=err)
        return 2
    finally:
        probe.close()
    app = create_app(bank, store_path=args.store)
    print(f"serving on http://{args.host}:{port}", file=out)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linegrade",
        description="Template grading and completion hints for write-a-line-of-code quizzes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="match candidate answers against one pattern")
    src = p_test.add_mutually_exclusive_group(required=True)
    src.add_argument("-e", "--pattern", help="template pattern")
    src.add_argument("--pattern-file", help="file holding the template pattern")
    p_test.add_argument("-f", "--answers-file", required=True, help="one candidate answer per line")
    p_test.add_argument("--hints", action="store_true", help="show the minimal completion per line")
    p_test.add_argument("--no-color", action="store_true")
    p_test.set_defaults(func=cmd_test)

    p_analyze = sub.add_parser("analyze", help="per-template metrics for a question bank")
    p_analyze.add_argument("--bank", required=True)
    p_analyze.set_defaults(func=cmd_analyze)

    p_grade = sub.add_parser("grade", help="batch-grade a CSV of responses")
    p_grade.add_argument("--bank", required=True)
    p_grade.add_argument(
        "--responses", required=True, help="CSV rows: question_id,text[,correct|incorrect]"
    )
    p_grade.add_argument("--metrics", action="store_true", help="print precision/recall/F1")
    p_grade.set_defaults(func=cmd_grade)

    p_serve = sub.add_parser("serve", help="run the practice HTTP service")
    p_serve.add_argument("--bank", required=True)
    p_serve.add_argument("--port", type=int, default=None, help=f"default ${PORT_ENV_VAR} or {DEFAULT_PORT}")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--store", default=None, help="append-only event log path")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
