"""Extraction tests: line tables, fragment records, datasets, and nesting."""

import ast
import json
import tokenize
from io import StringIO

import pytest

from rddify.corpus import CORPUS
from rddify.errors import ProgramSyntaxError
from rddify.frontend import (
    OpKind,
    extract_fragments,
    parse_program,
    to_extraction_json,
)

from conftest import fragments_from, make_program

EVEN_FILTER = """\
def even_filter(numbers):
    evens = []
    for num in numbers:
        if num % 2 == 0:
            evens.append(num)
    return evens
"""

FLATTEN = """\
def flatten(list_of_lists):
    result = []
    for sublist in list_of_lists:
        for item in sublist:
            result.append(item)
    return result
"""


# ---------------------------------------------------------------------------
# parse_program
# ---------------------------------------------------------------------------

def test_parse_even_filter_has_six_lines(tmp_path):
    program = make_program(tmp_path, EVEN_FILTER, "even_filter.py")
    assert len(program.lines) == 6
    assert program.line(3) == "    for num in numbers:"


def test_empty_file_parses_to_zero_lines(tmp_path):
    program = make_program(tmp_path, "", "empty.py")
    assert program.lines == ()


def test_malformed_header_reports_line(tmp_path):
    path = tmp_path / "bad.py"
    path.write_text("def f(:\n", encoding="utf-8")
    with pytest.raises(ProgramSyntaxError) as excinfo:
        parse_program(path)
    assert excinfo.value.line == 1


def test_missing_file_raises_file_not_found(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_program(tmp_path / "nope.py")


@pytest.mark.parametrize("source", [
    "", "x = 1", "x = 1\n", "a = 0\n\nb = a\n", "one = 1\r\ntwo = 2\r\n",
])
def test_line_table_round_trips_byte_for_byte(tmp_path, source):
    path = tmp_path / "roundtrip.py"
    path.write_text(source, encoding="utf-8", newline="")
    program = parse_program(path)
    assert program.rejoin() == program.text


def test_corpus_files_round_trip():
    for prog in CORPUS:
        program = parse_program(prog.program_path())
        assert program.rejoin() == program.text


# ---------------------------------------------------------------------------
# extract_fragments
# ---------------------------------------------------------------------------

def test_even_filter_fragment_matches_expected_record(tmp_path):
    _, fragments = fragments_from(tmp_path, EVEN_FILTER, "even_filter.py")
    assert len(fragments) == 1
    frag = fragments[0]
    assert frag.id == 1
    assert frag.start_line == 3
    assert abs(frag.end_line - 6) <= 1  # header through last body line
    assert not frag.is_nested
    assert frag.loop_var == "num"
    assert frag.input_datasets == ["numbers"]
    assert frag.output_datasets == ["evens"]
    kinds = [op.kind for op in frag.operations]
    exprs = [op.expression for op in frag.operations]
    assert kinds == [OpKind.CONDITIONAL, OpKind.METHOD_CALL]
    assert exprs == ["num % 2 == 0", "evens.append(num)"]


def test_flatten_matches_reference_ast_dump(tmp_path):
    """Cross-check spans and nesting against a raw ast walk of the source."""
    program, fragments = fragments_from(tmp_path, FLATTEN, "flatten.py")

    reference = [
        (node.lineno, node.end_lineno, node.target.id, node.iter.id)
        for node in ast.walk(ast.parse(program.text))
        if isinstance(node, ast.For)
    ]
    reference.sort()
    extracted = [
        (f.start_line, f.end_line, f.loop_var, f.iterable) for f in fragments
    ]
    assert extracted == reference

    outer, inner = fragments
    assert not outer.is_nested and inner.is_nested
    assert inner.parent_id == outer.id
    assert outer.input_datasets == ["list_of_lists"]
    assert outer.output_datasets == ["result"]
    # strict span containment
    assert outer.start_line < inner.start_line
    assert inner.end_line <= outer.end_line


def test_straight_line_program_yields_no_fragments(tmp_path):
    _, fragments = fragments_from(tmp_path, "def f(x):\n    return x + 1\n")
    assert fragments == []


def test_fragment_count_matches_loop_keyword_count():
    for prog in CORPUS:
        program = parse_program(prog.program_path())
        fragments = extract_fragments(program)
        keywords = sum(
            1 for tok in tokenize.generate_tokens(StringIO(program.text).readline)
            if tok.type == tokenize.NAME and tok.string in ("for", "while")
        )
        assert len(fragments) == keywords == prog.fragments


def test_nesting_forms_a_forest_with_contained_spans():
    for prog in CORPUS:
        fragments = extract_fragments(parse_program(prog.program_path()))
        by_id = {f.id: f for f in fragments}
        for frag in fragments:
            assert frag.is_nested == (frag.parent_id is not None)
            if frag.parent_id is not None:
                parent = by_id[frag.parent_id]
                assert parent.start_line < frag.start_line
                assert frag.end_line <= parent.end_line
        # sibling spans must not overlap
        siblings = [f for f in fragments if f.parent_id is None]
        spans = sorted((f.start_line, f.end_line) for f in siblings)
        for (_, prev_end), (next_start, _) in zip(spans, spans[1:]):
            assert next_start > prev_end


def test_outputs_appear_in_operation_expressions():
    for prog in CORPUS:
        for frag in extract_fragments(parse_program(prog.program_path())):
            for out in frag.output_datasets:
                assert any(out in op.expression for op in frag.operations)


def test_operations_are_in_source_order():
    for prog in CORPUS:
        for frag in extract_fragments(parse_program(prog.program_path())):
            lines = [op.line for op in frag.operations]
            assert lines == sorted(lines)


def test_operation_lines_lie_inside_their_fragment_span():
    for prog in CORPUS:
        for frag in extract_fragments(parse_program(prog.program_path())):
            for op in frag.operations:
                assert frag.start_line <= op.line <= frag.end_line


def test_elif_chain_yields_one_conditional_per_branch(tmp_path):
    source = (
        "def classify(xs):\n"
        "    small = []\n"
        "    for x in xs:\n"
        "        if x < 0:\n"
        "            small.append(x)\n"
        "        elif x < 10:\n"
        "            small.append(x)\n"
        "    return small\n"
    )
    _, fragments = fragments_from(tmp_path, source)
    conditions = [op.expression for op in fragments[0].operations
                  if op.kind is OpKind.CONDITIONAL]
    assert conditions == ["x < 0", "x < 10"]


def test_tuple_loop_target_marks_fragment_untranslatable(tmp_path):
    source = (
        "def swap(pairs):\n"
        "    out = []\n"
        "    for a, b in pairs:\n"
        "        out.append((b, a))\n"
        "    return out\n"
    )
    _, fragments = fragments_from(tmp_path, source)
    assert not fragments[0].translatable


def test_extraction_is_repeatable(tmp_path):
    program, first = fragments_from(tmp_path, EVEN_FILTER)
    second = extract_fragments(program)
    assert [f.start_line for f in first] == [f.start_line for f in second]
    assert program.rejoin() == program.text  # program untouched


def test_while_loop_is_extracted_but_untranslatable(tmp_path):
    source = "def f(n):\n    while n > 0:\n        n -= 1\n    return n\n"
    _, fragments = fragments_from(tmp_path, source)
    assert len(fragments) == 1
    assert not fragments[0].translatable
    assert "while" in fragments[0].reason


def test_unsupported_statement_marks_fragment_untranslatable(tmp_path):
    source = (
        "def f(xs):\n"
        "    out = []\n"
        "    for x in xs:\n"
        "        try:\n"
        "            out.append(x)\n"
        "        except ValueError:\n"
        "            pass\n"
        "    return out\n"
    )
    _, fragments = fragments_from(tmp_path, source)
    assert not fragments[0].translatable


def test_expression_iterable_marks_fragment_untranslatable(tmp_path):
    source = "def f(n):\n    out = []\n    for i in range(n):\n        out.append(i)\n    return out\n"
    _, fragments = fragments_from(tmp_path, source)
    assert not fragments[0].translatable


def test_preloaded_accumulator_detected_for_second_copy_loop(tmp_path):
    source = (
        "def u(a, b):\n"
        "    merged = []\n"
        "    for x in a:\n"
        "        merged.append(x)\n"
        "    for y in b:\n"
        "        merged.append(y)\n"
        "    return merged\n"
    )
    _, fragments = fragments_from(tmp_path, source)
    first, second = fragments
    assert "merged" in first.accumulator_inits
    assert first.preloaded_outputs == []
    assert second.preloaded_outputs == ["merged"]
    assert second.input_datasets == ["b", "merged"]


# ---------------------------------------------------------------------------
# to_extraction_json
# ---------------------------------------------------------------------------

def test_extraction_json_matches_expected_key_set(tmp_path):
    _, fragments = fragments_from(tmp_path, EVEN_FILTER, "even_filter.py")
    record = json.loads(to_extraction_json(fragments[0]))
    assert list(record) == [
        "Loop ID", "Start Line", "End Line", "Is Nested", "Datasets", "Operations",
    ]
    assert record["Is Nested"] == "No"
    assert record["Datasets"] == {"Input": "numbers", "Output": "evens"}
    assert record["Operations"][0] == {"Type": "Conditional", "Expression": "num % 2 == 0"}
    assert record["Operations"][1] == {"Type": "Method Call", "Expression": "evens.append(num)"}


def test_nested_inner_fragment_serializes_as_nested(tmp_path):
    _, fragments = fragments_from(tmp_path, FLATTEN)
    record = json.loads(to_extraction_json(fragments[1]))
    assert record["Is Nested"] == "Yes"


def test_three_operation_loop_serializes_in_source_order(tmp_path):
    source = (
        "def f(xs):\n"
        "    out = []\n"
        "    total = 0\n"
        "    for x in xs:\n"
        "        y = x + 1\n"
        "        out.append(y)\n"
        "        total += x\n"
        "    return out, total\n"
    )
    _, fragments = fragments_from(tmp_path, source)
    record = json.loads(to_extraction_json(fragments[0]))
    assert record["Operations"] == [
        {"Type": "Assign", "Expression": "y = x + 1"},
        {"Type": "Method Call", "Expression": "out.append(y)"},
        {"Type": "Augmented Assign", "Expression": "total += x"},
    ]


def test_extraction_json_round_trips(tmp_path):
    for prog in CORPUS:
        for frag in extract_fragments(parse_program(prog.program_path())):
            text = to_extraction_json(frag)
            assert json.loads(json.dumps(json.loads(text))) == json.loads(text)
