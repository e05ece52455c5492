"""Command-line interface.

``rddify translate`` runs the full pipeline on one program; ``rddify
corpus`` translates the bundled evaluation corpus and writes a delimited
summary with accompanying figures.

Exit codes for ``translate``: 0 translated, 2 no translation found,
3 baseline failed, 1 internal error.
"""

import argparse
import sys
import tempfile
import time
from pathlib import Path

from . import __version__
from .corpus import CORPUS
from .driver import (
    EXIT_BASELINE_FAILED,
    EXIT_INTERNAL_ERROR,
    EXIT_NO_TRANSLATION,
    EXIT_OK,
    STATUS_TRANSLATED,
    RunConfig,
    run,
)
from .errors import BaselineFailed, TranslatorError
from .frontend import extract_fragments, parse_program, to_extraction_json
from .reporting import CorpusRow, render_corpus_figures, suite_totals, write_corpus_csv


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "translate":
        return _cmd_translate(args, parser)
    if args.command == "corpus":
        return _cmd_corpus(args)
    parser.print_help()
    return EXIT_INTERNAL_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rddify",
        description="Translate sequential Python loops into verified RDD-style pipelines.",
    )
    parser.add_argument("--version", action="version", version=f"rddify {__version__}")
    commands = parser.add_subparsers(dest="command")

    translate = commands.add_parser(
        "translate", help="translate one program, verified against its own tests"
    )
    translate.add_argument("--input", required=True, help="sequential program file")
    translate.add_argument("--tests", help="pytest file the program must keep passing")
    translate.add_argument("--output", help="where to write the translated program")
    translate.add_argument("--backend", choices=["shim", "spark"], default="shim",
                           help="runtime the emitted bootstrap imports (default: shim)")
    translate.add_argument("--max-candidates", type=int, default=5, metavar="N",
                           help="ranked candidates taken from the predictor (default: 5)")
    translate.add_argument("--no-fallback", action="store_true",
                           help="disable the enumerative candidate fallback")
    translate.add_argument("--fallback-max-len", type=int, default=3, choices=[1, 2, 3],
                           help="longest chain the fallback enumerates (default: 3)")
    translate.add_argument("--timeout", type=float, default=60.0, metavar="S",
                           help="seconds per candidate test run (default: 60)")
    translate.add_argument("--report", metavar="FILE.json",
                           help="write the translation report as JSON")
    translate.add_argument("--dump-ir", action="store_true",
                           help="print each fragment's extraction record as JSON")
    translate.add_argument("--strict", action="store_true",
                           help="fail the run when any loop stays untranslated")
    translate.add_argument("--predictor-cmd", metavar="CMD",
                           help="external ranker: reads extraction JSON on stdin, "
                                "prints one chain per line, best first")

    corpus = commands.add_parser(
        "corpus", help="translate the bundled evaluation corpus and summarize"
    )
    corpus.add_argument("--output-dir", help="where translated programs are written")
    corpus.add_argument("--report-csv", metavar="FILE.csv",
                        help="write the per-program summary (figures land alongside)")
    corpus.add_argument("--no-figures", action="store_true",
                        help="skip rendering charts next to the CSV")
    corpus.add_argument("--no-fallback", action="store_true")
    corpus.add_argument("--timeout", type=float, default=60.0, metavar="S")
    return parser


def _cmd_translate(args, parser: argparse.ArgumentParser) -> int:
    dump_only = args.dump_ir and not (args.tests and args.output)
    if not dump_only and not (args.tests and args.output):
        print("error: --tests and --output are required (unless only dumping IR)",
              file=sys.stderr)
        return EXIT_INTERNAL_ERROR

    try:
        if dump_only:
            program = parse_program(args.input)
            for fragment in extract_fragments(program):
                print(to_extraction_json(fragment))
            return EXIT_OK

        config = RunConfig(
            input_path=args.input,
            test_path=args.tests,
            output_path=args.output,
            backend=args.backend,
            max_candidates=args.max_candidates,
            enable_fallback=not args.no_fallback,
            fallback_max_len=args.fallback_max_len,
            timeout_seconds=args.timeout,
            report_path=args.report,
            dump_ir=args.dump_ir,
            strict=args.strict,
            predictor_command=args.predictor_cmd,
        )
        report = run(config)
    except BaselineFailed as exc:
        print(f"baseline failed: {exc}", file=sys.stderr)
        return EXIT_BASELINE_FAILED
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR
    except TranslatorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR

    for outcome in report.fragments:
        chain = ",".join(outcome.chain) if outcome.chain else "-"
        suffix = f" (inside fragment {outcome.subsumed_by})" if outcome.subsumed_by else ""
        print(f"fragment {outcome.fragment_id}: {outcome.status} [{chain}]{suffix}")
    print(f"overall: {report.overall_status} "
          f"in {report.total_duration_seconds:.2f}s")
    if report.output_path:
        print(f"wrote {report.output_path}")
    return EXIT_OK if report.overall_status == STATUS_TRANSLATED else EXIT_NO_TRANSLATION


def _cmd_corpus(args) -> int:
    output_dir = Path(args.output_dir) if args.output_dir else Path(
        tempfile.mkdtemp(prefix="rddify-corpus-")
    )
    rows = []
    started = time.monotonic()
    for program in CORPUS:
        config = RunConfig(
            input_path=program.program_path(),
            test_path=program.tests_path(),
            output_path=output_dir / program.suite / program.filename,
            enable_fallback=not args.no_fallback,
            timeout_seconds=args.timeout,
        )
        report = run(config)
        translated = sum(
            1 for outcome in report.fragments if outcome.status == STATUS_TRANSLATED
        )
        rows.append(CorpusRow(
            suite=program.suite,
            program=program.name,
            fragments=len(report.fragments),
            translated=translated,
            status=report.overall_status,
            duration_seconds=report.total_duration_seconds,
        ))
        print(f"{program.suite}/{program.name}: {translated}/{len(report.fragments)} "
              f"fragments in {report.total_duration_seconds:.2f}s")

    print(f"\n{'suite':<22}{'programs':>9}{'fragments':>11}{'translated':>12}")
    for suite, programs, fragments, translated in suite_totals(rows):
        print(f"{suite:<22}{programs:>9}{fragments:>11}{translated:>12}")
    print(f"total wall time: {time.monotonic() - started:.1f}s")
    print(f"translated programs in {output_dir}")

    if args.report_csv:
        csv_path = Path(args.report_csv)
        write_corpus_csv(rows, csv_path)
        print(f"wrote {csv_path}")
        if not args.no_figures:
            for figure in render_corpus_figures(rows, csv_path):
                print(f"wrote {figure}")

    all_translated = all(row.translated == row.fragments for row in rows)
    return EXIT_OK if all_translated else EXIT_NO_TRANSLATION


if __name__ == "__main__":
    sys.exit(main())
