"""End-to-end translation driver.

Pipeline per run: parse the program, check the baseline (the original must
pass its own tests, or translation is refused), then walk the top-level loop
fragments in source order.  Each fragment gets a ranked candidate stream
(default ranker, or an external predictor command, optionally extended by
the enumerative fallback) and is verified candidate by candidate in its own
sandbox.  When a fragment translates, every loop nested inside it is covered
by the same splice and reported as subsumed; when it does not, its direct
children are attempted on their own.

After all fragments settle, the fully assembled program is verified once
more end to end, and only then written to the output path.
"""

import json
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .codegen import BACKEND_SHIM, BACKEND_SPARK, generate_program
from .errors import BaselineFailed, EmptyPrediction, NoTranslationFound
from .frontend import (
    LoopFragment,
    SourceProgram,
    extract_fragments,
    parse_program,
    to_extraction_json,
)
from .predictor import (
    enumerate_fallback,
    merge_candidates,
    predict_top_k,
    run_plugin_predictor,
)
from .refactorer import RefactoredSnippet
from .verifier import (
    CandidateAttempt,
    Verdict,
    materialize_candidate,
    run_tests_isolated,
    verify_candidates,
)

STATUS_TRANSLATED = "Translated"
STATUS_NOT_FOUND = "NoTranslationFound"
STATUS_UNTRANSLATABLE = "Untranslatable"
STATUS_BASELINE_FAILED = "BaselineFailed"

EXIT_OK = 0
EXIT_INTERNAL_ERROR = 1
EXIT_NO_TRANSLATION = 2
EXIT_BASELINE_FAILED = 3


@dataclass
class RunConfig:
    """Everything one translation run needs."""

    input_path: Path
    test_path: Path
    output_path: Path | None = None
    backend: str = BACKEND_SHIM
    max_candidates: int = 5
    enable_fallback: bool = True
    fallback_max_len: int = 3
    timeout_seconds: float = 60.0
    report_path: Path | None = None
    dump_ir: bool = False
    strict: bool = False
    predictor_command: str | None = None
    sandbox_root: Path | None = None

    def __post_init__(self):
        self.input_path = Path(self.input_path)
        self.test_path = Path(self.test_path)
        if self.output_path is not None:
            self.output_path = Path(self.output_path)
        if self.report_path is not None:
            self.report_path = Path(self.report_path)
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be at least 1")
        if self.fallback_max_len not in (1, 2, 3):
            raise ValueError("fallback_max_len must be 1, 2, or 3")
        if self.backend not in (BACKEND_SHIM, BACKEND_SPARK):
            raise ValueError(f"unknown backend: {self.backend!r}")


@dataclass
class FragmentOutcome:
    """Per-fragment entry of the translation report."""

    fragment_id: int
    status: str
    chain: tuple[str, ...] | None = None
    candidates_tried: int = 0
    verification_runs: int = 0
    duration_seconds: float = 0.0
    subsumed_by: int | None = None
    reason: str | None = None


@dataclass
class TranslationReport:
    """Outcome of one translation run."""

    program: str
    tests: str
    overall_status: str
    fragments: list[FragmentOutcome] = field(default_factory=list)
    total_duration_seconds: float = 0.0
    output_path: str | None = None
    backend: str = BACKEND_SHIM
    baseline_verdict: str | None = None
    confirmation_verdict: str | None = None

    def fragment(self, fragment_id: int) -> FragmentOutcome:
        for outcome in self.fragments:
            if outcome.fragment_id == fragment_id:
                return outcome
        raise KeyError(fragment_id)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=str)

    def write(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n", encoding="utf-8")


def run(config: RunConfig) -> TranslationReport:
    """Execute one full translation run and return its report."""
    started = time.monotonic()
    program = parse_program(config.input_path)
    if not config.test_path.exists():
        raise FileNotFoundError(str(config.test_path))

    fragments = extract_fragments(program)
    if config.dump_ir:
        for fragment in fragments:
            print(to_extraction_json(fragment))

    report = TranslationReport(
        program=str(config.input_path),
        tests=str(config.test_path),
        overall_status=STATUS_TRANSLATED,
        backend=config.backend,
    )

    try:
        _check_baseline(program, config, report)
    except BaselineFailed:
        report.overall_status = STATUS_BASELINE_FAILED
        report.total_duration_seconds = time.monotonic() - started
        if config.report_path is not None:
            report.write(config.report_path)
        raise

    snippets: list[RefactoredSnippet] = []
    worklist = [f for f in fragments if f.parent_id is None]
    settled: dict[int, FragmentOutcome] = {}

    while worklist:
        fragment = worklist.pop(0)
        outcome = _translate_fragment(program, fragment, snippets, config)
        settled[fragment.id] = outcome
        if outcome.status == STATUS_TRANSLATED:
            for descendant in _descendants(fragment):
                settled[descendant.id] = FragmentOutcome(
                    fragment_id=descendant.id,
                    status=STATUS_TRANSLATED,
                    chain=outcome.chain,
                    subsumed_by=fragment.id,
                )
        else:
            worklist = fragment.children + worklist

    report.fragments = [settled[f.id] for f in fragments if f.id in settled]

    translated_all = all(
        outcome.status == STATUS_TRANSLATED
        for outcome in report.fragments
        if outcome.status != STATUS_UNTRANSLATABLE
    )
    if config.strict:
        translated_all = translated_all and all(
            outcome.status == STATUS_TRANSLATED for outcome in report.fragments
        )
    if not translated_all:
        report.overall_status = STATUS_NOT_FOUND

    output_text = None
    if report.overall_status == STATUS_TRANSLATED:
        if snippets:
            if not _confirm_assembly(program, snippets, config, report):
                report.overall_status = STATUS_NOT_FOUND
            else:
                output_text = generate_program(
                    program, snippets, backend=config.backend
                )
        else:
            output_text = program.text  # nothing to translate: pass through

    if output_text is not None and config.output_path is not None:
        config.output_path.parent.mkdir(parents=True, exist_ok=True)
        config.output_path.write_text(output_text, encoding="utf-8")
        report.output_path = str(config.output_path)

    report.total_duration_seconds = time.monotonic() - started
    if config.report_path is not None:
        report.write(config.report_path)
    return report


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def _check_baseline(program: SourceProgram, config: RunConfig,
                    report: TranslationReport) -> None:
    """The original program must pass its own tests before we touch it."""
    sandbox = materialize_candidate(
        program, [], config.test_path, sandbox_root=config.sandbox_root
    )
    try:
        baseline = run_tests_isolated(sandbox, timeout=config.timeout_seconds)
    finally:
        sandbox.cleanup()
    report.baseline_verdict = baseline.verdict.value
    if baseline.verdict is not Verdict.VERIFIED:
        detail = baseline.failures[0][1] if baseline.failures else baseline.stderr_text
        raise BaselineFailed(
            f"original program fails its own tests ({baseline.verdict.value}): {detail}"
        )


def _candidates_for(fragment: LoopFragment, config: RunConfig):
    streams = []
    try:
        if config.predictor_command:
            streams.append(run_plugin_predictor(
                config.predictor_command, fragment, k=config.max_candidates
            ))
        else:
            streams.append(predict_top_k(fragment, k=config.max_candidates))
    except EmptyPrediction:
        pass
    if config.enable_fallback:
        streams.append(enumerate_fallback(fragment, max_len=config.fallback_max_len))
    return merge_candidates(*streams) if streams else []


def _translate_fragment(
    program: SourceProgram,
    fragment: LoopFragment,
    snippets: list[RefactoredSnippet],
    config: RunConfig,
) -> FragmentOutcome:
    started = time.monotonic()
    if not fragment.translatable:
        return FragmentOutcome(
            fragment_id=fragment.id,
            status=STATUS_UNTRANSLATABLE,
            reason=fragment.reason,
            duration_seconds=time.monotonic() - started,
        )

    candidates = _candidates_for(fragment, config)
    attempts: list[CandidateAttempt] = []
    if not candidates:
        return FragmentOutcome(
            fragment_id=fragment.id,
            status=STATUS_NOT_FOUND,
            reason="no candidate chains were proposed",
            duration_seconds=time.monotonic() - started,
        )
    try:
        chain, snippet = verify_candidates(
            program, fragment, candidates, config.test_path,
            timeout=config.timeout_seconds,
            context_snippets=tuple(snippets),
            sandbox_root=config.sandbox_root,
            attempt_log=attempts,
        )
    except NoTranslationFound:
        return FragmentOutcome(
            fragment_id=fragment.id,
            status=STATUS_NOT_FOUND,
            candidates_tried=len(attempts),
            verification_runs=sum(1 for a in attempts if a.outcome != "Unrefactorable"),
            reason="every candidate was rejected, unrefactorable, or crashed",
            duration_seconds=time.monotonic() - started,
        )
    snippets.append(snippet)
    return FragmentOutcome(
        fragment_id=fragment.id,
        status=STATUS_TRANSLATED,
        chain=chain.ops,
        candidates_tried=len(attempts),
        verification_runs=sum(1 for a in attempts if a.outcome != "Unrefactorable"),
        duration_seconds=time.monotonic() - started,
    )


def _confirm_assembly(
    program: SourceProgram,
    snippets: list[RefactoredSnippet],
    config: RunConfig,
    report: TranslationReport,
) -> bool:
    """One last end-to-end run of the fully assembled program."""
    sandbox = materialize_candidate(
        program, snippets, config.test_path, sandbox_root=config.sandbox_root
    )
    try:
        confirmation = run_tests_isolated(sandbox, timeout=config.timeout_seconds)
    finally:
        sandbox.cleanup()
    report.confirmation_verdict = confirmation.verdict.value
    return confirmation.verdict is Verdict.VERIFIED


def _descendants(fragment: LoopFragment):
    for child in fragment.children:
        yield child
        yield from _descendants(child)
