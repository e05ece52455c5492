"""Verifier tests: report parsing, sandboxing, timeouts, candidate search."""

import pytest

from rddify.errors import MalformedReport, NoTranslationFound
from rddify.predictor import CandidateChain, parse_chain_line
from rddify.refactorer import refactor
from rddify.verifier import (
    Sandbox,
    Verdict,
    materialize_candidate,
    parse_test_report,
    run_tests_isolated,
    verify_candidates,
)

from conftest import fragments_from

EVEN_FILTER = """\
def even_filter(numbers):
    evens = []
    for num in numbers:
        if num % 2 == 0:
            evens.append(num)
    return evens
"""

EVEN_FILTER_TESTS = """\
from even_filter import even_filter


def test_keeps_only_evens():
    assert even_filter([1, 2, 2, 3, 4]) == [2, 2, 4]


def test_empty():
    assert even_filter([]) == []
"""


def even_filter_setup(tmp_path):
    program, fragments = fragments_from(tmp_path, EVEN_FILTER, "even_filter.py")
    tests = tmp_path / "test_even_filter.py"
    tests.write_text(EVEN_FILTER_TESTS, encoding="utf-8")
    return program, fragments[0], tests


def chain(*ops):
    return CandidateChain(ops=tuple(ops), score=1.0)


# ---------------------------------------------------------------------------
# parse_test_report
# ---------------------------------------------------------------------------

CLEAN_REPORT = """\
<testsuites><testsuite name="pytest" tests="3" failures="0" errors="0">
<testcase classname="test_mod" name="test_a"/>
<testcase classname="test_mod" name="test_b"/>
<testcase classname="test_mod" name="test_c"/>
</testsuite></testsuites>
"""

FAILING_REPORT = """\
<testsuites><testsuite name="pytest" tests="2" failures="1" errors="0">
<testcase classname="test_mod" name="test_ok"/>
<testcase classname="test_mod" name="test_bad">
<failure message="assert [1] == [2]">traceback</failure>
</testcase>
</testsuite></testsuites>
"""


def test_clean_report_parses():
    assert parse_test_report(CLEAN_REPORT) == (3, [])


def test_failure_message_is_collected():
    tests_run, failures = parse_test_report(FAILING_REPORT)
    assert tests_run == 2
    assert failures == [("test_mod.test_bad", "assert [1] == [2]")]


def test_error_elements_count_as_failures():
    report = CLEAN_REPORT.replace(
        '<testcase classname="test_mod" name="test_a"/>',
        '<testcase classname="test_mod" name="test_a">'
        '<error message="boom"/></testcase>',
    )
    _, failures = parse_test_report(report)
    assert failures == [("test_mod.test_a", "boom")]


def test_truncated_xml_is_malformed():
    with pytest.raises(MalformedReport):
        parse_test_report(CLEAN_REPORT[: len(CLEAN_REPORT) // 2])


def test_report_without_testsuite_is_malformed():
    with pytest.raises(MalformedReport):
        parse_test_report("<nothing/>")


# ---------------------------------------------------------------------------
# materialize_candidate
# ---------------------------------------------------------------------------

def test_sandbox_holds_candidate_tests_and_runtime(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    snippet = refactor(program and fragment, chain("filter"))
    sandbox = materialize_candidate(program, [snippet], tests, sandbox_root=tmp_path)
    try:
        names = sorted(p.name for p in sandbox.path.iterdir())
        assert names == ["even_filter.py", "minirdd.py", "test_even_filter.py"]
        # the user's tests are byte-identical inside the sandbox
        assert (sandbox.path / "test_even_filter.py").read_bytes() == tests.read_bytes()
    finally:
        sandbox.cleanup()


def test_each_materialization_gets_a_fresh_directory(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    first = materialize_candidate(program, [], tests, sandbox_root=tmp_path)
    second = materialize_candidate(program, [], tests, sandbox_root=tmp_path)
    try:
        assert first.path != second.path
    finally:
        first.cleanup()
        second.cleanup()


def test_unusable_sandbox_root_raises_oserror(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    not_a_dir = tmp_path / "just-a-file"
    not_a_dir.write_text("!", encoding="utf-8")
    with pytest.raises(OSError):
        materialize_candidate(program, [], tests, sandbox_root=not_a_dir)


# ---------------------------------------------------------------------------
# run_tests_isolated
# ---------------------------------------------------------------------------

def test_original_program_passes_then_correct_translation_verifies(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    # baseline first: the sequential original passes these tests
    baseline_box = materialize_candidate(program, [], tests, sandbox_root=tmp_path)
    try:
        baseline = run_tests_isolated(baseline_box, timeout=60)
    finally:
        baseline_box.cleanup()
    assert baseline.verdict is Verdict.VERIFIED
    assert baseline.tests_run == 2

    snippet = refactor(fragment, chain("filter"))
    sandbox = materialize_candidate(program, [snippet], tests, sandbox_root=tmp_path)
    try:
        report = run_tests_isolated(sandbox, timeout=60)
    finally:
        sandbox.cleanup()
    assert report.verdict is Verdict.VERIFIED
    assert report.failures == []
    assert report.stderr_text == ""


def test_wrong_candidate_is_rejected_with_a_failure_message(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    snippet = refactor(fragment, chain("map"))  # identity map: wrong semantics
    sandbox = materialize_candidate(program, [snippet], tests, sandbox_root=tmp_path)
    try:
        report = run_tests_isolated(sandbox, timeout=60)
    finally:
        sandbox.cleanup()
    assert report.verdict is Verdict.REJECTED
    assert len(report.failures) >= 1
    assert report.tests_run == 2


def test_infinite_loop_times_out(tmp_path):
    (tmp_path / "spin.py").write_text(
        "def spin(xs):\n    while True:\n        pass\n", encoding="utf-8"
    )
    tests = tmp_path / "test_spin.py"
    tests.write_text(
        "from spin import spin\n\n\ndef test_spin():\n    spin([1])\n",
        encoding="utf-8",
    )
    sandbox = Sandbox(path=tmp_path, program_name="spin.py", test_name="test_spin.py")
    report = run_tests_isolated(sandbox, timeout=3)
    assert report.verdict is Verdict.TIMED_OUT
    assert report.duration < 3 + 5


def test_stderr_output_rejects_even_when_tests_pass(tmp_path):
    (tmp_path / "noisy.py").write_text(
        "import sys\n\n\ndef noisy(x):\n    print('warn', file=sys.stderr)\n    return x\n",
        encoding="utf-8",
    )
    tests = tmp_path / "test_noisy.py"
    tests.write_text(
        "from noisy import noisy\n\n\ndef test_noisy():\n    assert noisy(3) == 3\n",
        encoding="utf-8",
    )
    sandbox = Sandbox(path=tmp_path, program_name="noisy.py", test_name="test_noisy.py")
    strict = run_tests_isolated(sandbox, timeout=60)
    assert strict.verdict is Verdict.REJECTED
    assert strict.stderr_text != ""
    # an allowlist covering the line restores the verdict
    relaxed = run_tests_isolated(sandbox, timeout=60,
                                 stderr_allowlist=(r"^\s*$", r"^warn$"))
    assert relaxed.verdict is Verdict.VERIFIED


def test_crash_without_report_is_crashed(tmp_path):
    sandbox = Sandbox(path=tmp_path, program_name="x.py", test_name="no_such_test.py")
    report = run_tests_isolated(sandbox, timeout=30)
    assert report.verdict in (Verdict.CRASHED, Verdict.REJECTED)
    assert report.verdict is Verdict.CRASHED or report.tests_run == 0


# ---------------------------------------------------------------------------
# verify_candidates
# ---------------------------------------------------------------------------

LEARNED_RANKER_TOP5 = [
    "flatMap(),count()", "take()", "sortBy()", "map(),distinct()", "filter()",
]


def test_rank_ordered_search_accepts_the_fifth_candidate(tmp_path):
    """The correct chain sits at rank 5; all earlier ones must be consumed."""
    program, fragment, tests = even_filter_setup(tmp_path)
    candidates = [
        CandidateChain(ops=parse_chain_line(line), score=1.0 / (1 + i))
        for i, line in enumerate(LEARNED_RANKER_TOP5)
    ]
    attempts = []
    chain_found, snippet = verify_candidates(
        program, fragment, candidates, tests,
        sandbox_root=tmp_path, attempt_log=attempts,
    )
    assert chain_found.ops == ("filter",)
    assert snippet.text.startswith("evens = numbers_rdd.filter")
    assert [a.ops for a in attempts][-1] == ("filter",)
    outcomes = {tuple(a.ops): a.outcome for a in attempts}
    assert outcomes[("flatMap", "count")] == "Unrefactorable"
    assert outcomes[("take",)] == "Unrefactorable"
    assert outcomes[("sortBy",)] == "Rejected"
    assert outcomes[("map", "distinct")] == "Rejected"
    assert outcomes[("filter",)] == "Verified"


def test_no_translation_found_when_all_candidates_fail(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    candidates = [chain("sortBy"), chain("take")]
    with pytest.raises(NoTranslationFound):
        verify_candidates(program, fragment, candidates, tests, sandbox_root=tmp_path)


def test_candidates_after_the_verified_one_change_nothing(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    short = [chain("filter")]
    extended = [chain("filter"), chain("map"), chain("sortBy")]
    first, _ = verify_candidates(program, fragment, short, tests, sandbox_root=tmp_path)
    second, _ = verify_candidates(program, fragment, extended, tests, sandbox_root=tmp_path)
    assert first.ops == second.ops == ("filter",)


def test_no_sandbox_directories_remain(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    root = tmp_path / "sandboxes"
    root.mkdir()
    verify_candidates(
        program, fragment,
        [chain("map"), chain("filter")],
        tests, sandbox_root=root,
    )
    with pytest.raises(NoTranslationFound):
        verify_candidates(program, fragment, [chain("sortBy")], tests, sandbox_root=root)
    assert list(root.iterdir()) == []


def test_empty_candidate_list_raises(tmp_path):
    program, fragment, tests = even_filter_setup(tmp_path)
    with pytest.raises(NoTranslationFound):
        verify_candidates(program, fragment, [], tests, sandbox_root=tmp_path)
