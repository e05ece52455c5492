"""Sandboxed verification of candidate translations.

A candidate program is materialized into a fresh temporary directory next to
a byte-identical copy of the user's test file and the bundled local runtime,
then the external test runner executes there as a child process with a
JUnit-style XML report requested.  A candidate is accepted only when that
report shows at least one test, no failures or errors, and the child's
standard error is empty after allowlist filtering.

Candidates for one fragment are consumed strictly in rank order and the
first verified one wins; every sandbox is removed again no matter how its
run ended.
"""

import os
import re
import shutil
import signal
import subprocess
import sys
import tempfile
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .codegen import generate_program
from .errors import MalformedReport, NoTranslationFound, Unrefactorable
from .frontend import LoopFragment, SourceProgram
from .predictor import CandidateChain
from .refactorer import RefactoredSnippet, refactor
from .runtime import SHIM_FILENAME, shim_source

REPORT_FILENAME = "report.xml"
DEFAULT_TIMEOUT = 60.0

# stderr lines that never count against the empty-stderr requirement
DEFAULT_STDERR_ALLOWLIST = (r"^\s*$",)


class Verdict(str, Enum):
    VERIFIED = "Verified"
    REJECTED = "Rejected"
    CRASHED = "Crashed"
    TIMED_OUT = "TimedOut"


@dataclass
class VerificationReport:
    """Structured outcome of one sandboxed test run."""

    verdict: Verdict
    tests_run: int
    failures: list[tuple[str, str]]
    stderr_text: str            # after allowlist filtering
    duration: float
    raw_stderr: str = ""
    stdout_text: str = ""


@dataclass
class Sandbox:
    """A fresh directory holding one candidate, its tests, and the runtime."""

    path: Path
    program_name: str
    test_name: str

    def cleanup(self) -> None:
        shutil.rmtree(self.path, ignore_errors=True)


@dataclass
class CandidateAttempt:
    """One consumed candidate, for the translation report."""

    ops: tuple[str, ...]
    outcome: str                 # verdict name or "Unrefactorable"
    detail: str = ""
    duration: float = 0.0


def materialize_candidate(
    program: SourceProgram,
    snippets: list[RefactoredSnippet],
    tests_path,
    backend: str = "shim",
    sandbox_root=None,
) -> Sandbox:
    """Generate the candidate program into a fresh sandbox directory."""
    tests_path = Path(tests_path)
    root = str(sandbox_root) if sandbox_root else None
    path = Path(tempfile.mkdtemp(prefix="rddify-sbx-", dir=root))
    try:
        candidate_text = generate_program(program, snippets, backend=backend)
        (path / program.path.name).write_text(candidate_text, encoding="utf-8")
        shutil.copyfile(tests_path, path / tests_path.name)
        (path / SHIM_FILENAME).write_text(shim_source(), encoding="utf-8")
    except Exception:
        shutil.rmtree(path, ignore_errors=True)
        raise
    return Sandbox(path=path, program_name=program.path.name, test_name=tests_path.name)


def run_tests_isolated(
    sandbox: Sandbox,
    timeout: float = DEFAULT_TIMEOUT,
    stderr_allowlist: tuple[str, ...] = DEFAULT_STDERR_ALLOWLIST,
) -> VerificationReport:
    """Run the user's tests against the sandboxed candidate."""
    # --capture=no lets the candidate's own stderr reach this process, which
    # is what the empty-stderr acceptance condition is about.
    command = [
        sys.executable, "-m", "pytest", sandbox.test_name,
        "-q", "--capture=no", "-p", "no:cacheprovider",
        "--junit-xml", REPORT_FILENAME,
    ]
    env = dict(os.environ)
    env.pop("PYTEST_ADDOPTS", None)
    env.pop("PYTEST_PLUGINS", None)
    env["PYTEST_DISABLE_PLUGIN_AUTOLOAD"] = "1"
    env["PYTHONDONTWRITEBYTECODE"] = "1"

    started = time.monotonic()
    proc = subprocess.Popen(
        command,
        cwd=sandbox.path,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
        env=env,
        start_new_session=True,
    )
    try:
        stdout, stderr = proc.communicate(timeout=timeout)
    except subprocess.TimeoutExpired:
        _kill_process_tree(proc)
        stdout, stderr = proc.communicate()
        return VerificationReport(
            verdict=Verdict.TIMED_OUT,
            tests_run=0,
            failures=[],
            stderr_text=_filter_stderr(stderr or "", stderr_allowlist),
            duration=time.monotonic() - started,
            raw_stderr=stderr or "",
            stdout_text=stdout or "",
        )
    duration = time.monotonic() - started

    report_path = sandbox.path / REPORT_FILENAME
    filtered = _filter_stderr(stderr, stderr_allowlist)
    if not report_path.exists():
        return VerificationReport(
            verdict=Verdict.CRASHED, tests_run=0, failures=[],
            stderr_text=filtered, duration=duration,
            raw_stderr=stderr, stdout_text=stdout,
        )
    try:
        tests_run, failures = parse_test_report(report_path.read_text(encoding="utf-8"))
    except MalformedReport:
        return VerificationReport(
            verdict=Verdict.CRASHED, tests_run=0, failures=[],
            stderr_text=filtered, duration=duration,
            raw_stderr=stderr, stdout_text=stdout,
        )

    if not failures and tests_run >= 1 and not filtered:
        verdict = Verdict.VERIFIED
    else:
        verdict = Verdict.REJECTED
    return VerificationReport(
        verdict=verdict, tests_run=tests_run, failures=failures,
        stderr_text=filtered, duration=duration,
        raw_stderr=stderr, stdout_text=stdout,
    )


def parse_test_report(xml_text: str) -> tuple[int, list[tuple[str, str]]]:
    """Extract (tests run, failing cases) from a JUnit-style XML report."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedReport(f"unparseable test report: {exc}") from exc

    suites = [root] if root.tag == "testsuite" else list(root.iter("testsuite"))
    if not suites:
        raise MalformedReport("report contains no testsuite element")

    tests_run = 0
    failures: list[tuple[str, str]] = []
    for suite in suites:
        tests_run += int(suite.get("tests", 0))
        for case in suite.iter("testcase"):
            name = ".".join(filter(None, (case.get("classname"), case.get("name"))))
            for problem in list(case.findall("failure")) + list(case.findall("error")):
                message = problem.get("message") or (problem.text or "").strip()
                failures.append((name, message))
    return tests_run, failures


def verify_candidates(
    program: SourceProgram,
    fragment: LoopFragment,
    candidates: list[CandidateChain],
    tests_path,
    timeout: float = DEFAULT_TIMEOUT,
    context_snippets: tuple[RefactoredSnippet, ...] = (),
    backend: str = "shim",
    sandbox_root=None,
    attempt_log: list[CandidateAttempt] | None = None,
) -> tuple[CandidateChain, RefactoredSnippet]:
    """Try candidates in rank order; return the first verified one.

    ``context_snippets`` are splices already verified for other fragments;
    they are included in every candidate program so fragments are checked in
    the program they will finally live in.
    """
    if not candidates:
        raise NoTranslationFound(fragment.id)
    attempts = attempt_log if attempt_log is not None else []
    for candidate in candidates:
        try:
            snippet = refactor(fragment, candidate)
        except Unrefactorable as exc:
            attempts.append(CandidateAttempt(candidate.ops, "Unrefactorable", exc.reason))
            continue
        sandbox = materialize_candidate(
            program, [*context_snippets, snippet], tests_path,
            backend=backend, sandbox_root=sandbox_root,
        )
        try:
            report = run_tests_isolated(sandbox, timeout=timeout)
        finally:
            sandbox.cleanup()
        detail = report.failures[0][1] if report.failures else report.stderr_text
        attempts.append(
            CandidateAttempt(candidate.ops, report.verdict.value, detail, report.duration)
        )
        if report.verdict is Verdict.VERIFIED:
            return candidate, snippet
    raise NoTranslationFound(fragment.id, attempts)


def _filter_stderr(stderr: str, allowlist: tuple[str, ...]) -> str:
    patterns = [re.compile(p) for p in allowlist]
    kept = [
        line for line in stderr.splitlines()
        if not any(p.search(line) for p in patterns)
    ]
    return "\n".join(kept)


def _kill_process_tree(proc: subprocess.Popen) -> None:
    try:
        os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        proc.kill()
