"""Loop-fragment extraction from sequential Python source.

Walks the standard-library AST of the input program and lifts every
``for``/``while`` statement into a :class:`LoopFragment`: line span, nesting
links, iteration variable, inferred input/output datasets, and the ordered
list of operations found inside the loop body (recursively, so an outer loop
also records the operations of its inner loops).

Dataset inference follows two rules: the iterable of a ``for`` header is an
input dataset; any identifier that receives ``.append(...)`` or is the target
of an augmented assignment inside the loop is an output dataset.  An output
whose most recent prior write is not an empty-literal initialization directly
reachable before the loop is additionally treated as an input ("preloaded"):
its prior contents survive the loop, which is what concatenation-style loops
look like.

Only a small statement subset is supported inside loops (conditionals, calls,
method calls, plain and augmented assignments).  Anything else marks the
fragment untranslatable; later stages leave such loops verbatim.
"""

import ast
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ProgramSyntaxError

_EMPTY_INITS = {"[]", "()", "{}", "0", "0.0", "''", '""', "set()"}

_AUG_OPS = {
    ast.Add: "+",
    ast.Sub: "-",
    ast.Mult: "*",
    ast.Div: "/",
    ast.FloorDiv: "//",
    ast.Mod: "%",
    ast.Pow: "**",
}


class OpKind(Enum):
    """Kinds of statements recorded inside a loop body."""

    CONDITIONAL = "Conditional"
    METHOD_CALL = "Method Call"
    AUGMENTED_ASSIGN = "Augmented Assign"
    ASSIGN = "Assign"
    FUNCTION_CALL = "Function Call"


@dataclass(frozen=True)
class OperationRecord:
    """One statement inside a loop fragment.

    ``expression`` is the verbatim source text of the statement (for
    conditionals, of the test alone).  The remaining optional fields cache
    the pieces later stages keep asking about.
    """

    kind: OpKind
    expression: str
    variables: tuple[str, ...]
    line: int
    receiver: str | None = None       # method-call receiver identifier
    method: str | None = None         # method name for method calls
    target: str | None = None         # assignment target identifier
    op_symbol: str | None = None      # augmented-assignment operator
    value_source: str | None = None   # RHS (assignments) or sole argument (calls)
    owner_loop_var: str | None = None  # loop variable of the nearest enclosing loop


@dataclass
class LoopFragment:
    """One extracted iterative region of the input program."""

    id: int
    start_line: int
    end_line: int
    is_nested: bool
    parent_id: int | None
    loop_var: str | None
    input_datasets: list[str]
    output_datasets: list[str]
    operations: list[OperationRecord]
    translatable: bool = True
    reason: str | None = None
    header_indent: str = ""
    iterable: str | None = None
    children: list["LoopFragment"] = field(default_factory=list)
    # output var -> empty-literal source when freshly initialized before the loop
    accumulator_inits: dict[str, str] = field(default_factory=dict)
    preloaded_outputs: list[str] = field(default_factory=list)
    used_after: dict[str, bool] = field(default_factory=dict)

    @property
    def nested_depth(self) -> int:
        """Depth of the loop nest rooted at this fragment (1 = no inner loop)."""
        if not self.children:
            return 1
        return 1 + max(child.nested_depth for child in self.children)

    def own_operations(self) -> list[OperationRecord]:
        """Operations sitting directly under this loop, not under inner loops."""
        return [op for op in self.operations if op.owner_loop_var == self.loop_var]

    def mark_untranslatable(self, reason: str) -> None:
        if self.translatable:
            self.translatable = False
            self.reason = reason


@dataclass(frozen=True)
class SourceProgram:
    """An input program with an indexed, 1-based line table."""

    path: Path
    text: str
    lines: tuple[str, ...]
    trailing_newline: bool

    def line(self, number: int) -> str:
        return self.lines[number - 1]

    def rejoin(self) -> str:
        """Rebuild the full text from the line table, byte for byte."""
        joined = "\n".join(self.lines)
        return joined + "\n" if self.trailing_newline else joined


def parse_program(path) -> SourceProgram:
    """Read and syntax-check a program file.

    Raises FileNotFoundError if the file is missing and
    :class:`ProgramSyntaxError` (with location) if it does not parse.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        ast.parse(text, filename=str(path))
    except SyntaxError as exc:
        raise ProgramSyntaxError(
            exc.msg, line=exc.lineno, column=exc.offset, text=exc.text
        ) from exc
    return _program_from_text(path, text)


def _program_from_text(path: Path, text: str) -> SourceProgram:
    if not text:
        return SourceProgram(path=path, text=text, lines=(), trailing_newline=False)
    raw = text.split("\n")
    trailing = raw[-1] == ""
    if trailing:
        raw = raw[:-1]
    return SourceProgram(path=path, text=text, lines=tuple(raw), trailing_newline=trailing)


def to_extraction_json(fragment: LoopFragment) -> str:
    """Serialize a fragment to the extraction-record JSON format.

    Single datasets are emitted as bare strings, multiple ones as arrays.
    """

    def one_or_list(values):
        return values[0] if len(values) == 1 else list(values)

    record = {
        "Loop ID": fragment.id,
        "Start Line": fragment.start_line,
        "End Line": fragment.end_line,
        "Is Nested": "Yes" if fragment.is_nested else "No",
        "Datasets": {
            "Input": one_or_list(fragment.input_datasets),
            "Output": one_or_list(fragment.output_datasets),
        },
        "Operations": [
            {"Type": op.kind.value, "Expression": op.expression}
            for op in fragment.operations
        ],
    }
    return json.dumps(record, indent=1)


# ---------------------------------------------------------------------------
# Extraction walk
# ---------------------------------------------------------------------------

def extract_fragments(program: SourceProgram) -> list[LoopFragment]:
    """Extract every loop of the program as a fragment, in source order."""
    if not program.text.strip():
        return []
    tree = ast.parse(program.text)
    extractor = _Extractor(program)
    extractor.walk_block(tree.body)
    for fragment in extractor.fragments:
        _infer_datasets(fragment)
        _analyze_context(fragment, extractor, tree)
    return extractor.fragments


class _Extractor:
    """Recursive statement walk that builds fragments and operation records."""

    def __init__(self, program: SourceProgram):
        self.program = program
        self.fragments: list[LoopFragment] = []
        self._stack: list[LoopFragment] = []
        # fragment id -> (sibling statement list, index of the loop statement)
        self.loop_context: dict[int, tuple[list[ast.stmt], int]] = {}

    # -- block traversal ----------------------------------------------------

    def walk_block(self, stmts: list[ast.stmt]) -> None:
        for index, stmt in enumerate(stmts):
            if isinstance(stmt, (ast.For, ast.While)):
                self._enter_loop(stmt, stmts, index)
            elif self._stack:
                self._classify(stmt)
            else:
                # Outside any loop every construct is fine; just look inside
                # compound statements for more loops.
                for block in _sub_blocks(stmt):
                    self.walk_block(block)

    def _enter_loop(self, node, siblings: list[ast.stmt], index: int) -> None:
        parent = self._stack[-1] if self._stack else None
        fragment = LoopFragment(
            id=len(self.fragments) + 1,
            start_line=node.lineno,
            end_line=node.end_lineno,
            is_nested=parent is not None,
            parent_id=parent.id if parent else None,
            loop_var=None,
            input_datasets=[],
            output_datasets=[],
            operations=[],
            header_indent=_leading_whitespace(self.program.line(node.lineno)),
        )
        self.fragments.append(fragment)
        self.loop_context[fragment.id] = (siblings, index)
        if parent:
            parent.children.append(fragment)

        if isinstance(node, ast.While):
            fragment.mark_untranslatable("while loops are not translated")
        else:
            if isinstance(node.target, ast.Name):
                fragment.loop_var = node.target.id
            else:
                fragment.mark_untranslatable("loop target is not a plain name")
            if isinstance(node.iter, ast.Name):
                fragment.iterable = node.iter.id
            else:
                fragment.mark_untranslatable("loop iterates over an expression, not a named dataset")
        if node.orelse:
            fragment.mark_untranslatable("loop has an else clause")

        self._stack.append(fragment)
        self.walk_block(node.body)
        self._stack.pop()

    # -- statement classification -------------------------------------------

    def _classify(self, stmt: ast.stmt) -> None:
        if isinstance(stmt, ast.If):
            self._record(OperationRecord(
                kind=OpKind.CONDITIONAL,
                expression=self._segment(stmt.test),
                variables=_names_in(stmt.test),
                line=stmt.lineno,
                owner_loop_var=self._owner(),
            ))
            self.walk_block(stmt.body)
            self.walk_block(stmt.orelse)
        elif isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Call):
            self._classify_call(stmt)
        elif isinstance(stmt, ast.AugAssign):
            self._classify_augassign(stmt)
        elif isinstance(stmt, ast.Assign):
            self._classify_assign(stmt)
        elif isinstance(stmt, ast.Pass):
            pass
        elif isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Constant):
            pass  # stray string/constant, e.g. a docstring-style comment
        else:
            self._mark_all(f"unsupported statement: {type(stmt).__name__}")

    def _classify_call(self, stmt: ast.Expr) -> None:
        call = stmt.value
        if isinstance(call.func, ast.Attribute) and isinstance(call.func.value, ast.Name):
            self._record(OperationRecord(
                kind=OpKind.METHOD_CALL,
                expression=self._segment(call),
                variables=_names_in(call),
                line=stmt.lineno,
                receiver=call.func.value.id,
                method=call.func.attr,
                value_source=self._segment(call.args[0]) if len(call.args) == 1 else None,
                owner_loop_var=self._owner(),
            ))
        elif isinstance(call.func, ast.Name):
            self._record(OperationRecord(
                kind=OpKind.FUNCTION_CALL,
                expression=self._segment(call),
                variables=_names_in(call),
                line=stmt.lineno,
                value_source=self._segment(call.args[0]) if len(call.args) == 1 else None,
                owner_loop_var=self._owner(),
            ))
        else:
            self._mark_all("unsupported call form inside loop")

    def _classify_augassign(self, stmt: ast.AugAssign) -> None:
        if not isinstance(stmt.target, ast.Name):
            self._mark_all("augmented assignment to a non-name target")
            return
        op_symbol = _AUG_OPS.get(type(stmt.op))
        if op_symbol is None:
            self._mark_all(f"unsupported accumulation operator: {type(stmt.op).__name__}")
            return
        self._record(OperationRecord(
            kind=OpKind.AUGMENTED_ASSIGN,
            expression=self._segment(stmt),
            variables=_names_in(stmt),
            line=stmt.lineno,
            target=stmt.target.id,
            op_symbol=op_symbol,
            value_source=self._segment(stmt.value),
            owner_loop_var=self._owner(),
        ))

    def _classify_assign(self, stmt: ast.Assign) -> None:
        if len(stmt.targets) != 1 or not isinstance(stmt.targets[0], ast.Name):
            self._mark_all("assignment to a non-name or multiple targets")
            return
        self._record(OperationRecord(
            kind=OpKind.ASSIGN,
            expression=self._segment(stmt),
            variables=_names_in(stmt),
            line=stmt.lineno,
            target=stmt.targets[0].id,
            value_source=self._segment(stmt.value),
            owner_loop_var=self._owner(),
        ))

    # -- helpers --------------------------------------------------------------

    def _record(self, op: OperationRecord) -> None:
        for fragment in self._stack:
            fragment.operations.append(op)

    def _mark_all(self, reason: str) -> None:
        for fragment in self._stack:
            fragment.mark_untranslatable(reason)

    def _owner(self) -> str | None:
        return self._stack[-1].loop_var if self._stack else None

    def _segment(self, node: ast.AST) -> str:
        segment = ast.get_source_segment(self.program.text, node)
        return segment if segment is not None else ast.unparse(node)


def _sub_blocks(stmt: ast.stmt) -> list[list[ast.stmt]]:
    """Statement lists nested inside a non-loop compound statement."""
    blocks = []
    for name in ("body", "orelse", "finalbody"):
        block = getattr(stmt, name, None)
        if isinstance(block, list) and block and isinstance(block[0], ast.stmt):
            blocks.append(block)
    for handler in getattr(stmt, "handlers", []) or []:
        blocks.append(handler.body)
    return blocks


def _leading_whitespace(line: str) -> str:
    return line[: len(line) - len(line.lstrip())]


def _names_in(node: ast.AST) -> tuple[str, ...]:
    """Identifiers referenced by a node, in syntactic order, deduplicated."""
    seen: list[str] = []

    def visit(current: ast.AST) -> None:
        if isinstance(current, ast.Name) and current.id not in seen:
            seen.append(current.id)
        for child in ast.iter_child_nodes(current):
            visit(child)

    visit(node)
    return tuple(seen)


# ---------------------------------------------------------------------------
# Dataset and context inference
# ---------------------------------------------------------------------------

def _infer_datasets(fragment: LoopFragment) -> None:
    bound_vars = _span_loop_vars(fragment)

    inputs: list[str] = []
    for frag in _self_and_descendants(fragment):
        if frag.iterable and frag.iterable not in bound_vars and frag.iterable not in inputs:
            inputs.append(frag.iterable)

    outputs: list[str] = []
    for op in fragment.operations:
        name = None
        if op.kind is OpKind.METHOD_CALL and op.method in ("append", "extend", "insert"):
            name = op.receiver
        elif op.kind is OpKind.AUGMENTED_ASSIGN:
            name = op.target
        if name and name not in outputs:
            outputs.append(name)

    fragment.input_datasets = inputs
    fragment.output_datasets = outputs


def _analyze_context(fragment: LoopFragment, extractor: _Extractor, tree: ast.Module) -> None:
    siblings, index = extractor.loop_context[fragment.id]
    params = _enclosing_params(tree, fragment.start_line)

    for var in fragment.output_datasets:
        init = _find_fresh_init(siblings[:index], var)
        if init is not None:
            fragment.accumulator_inits[var] = init
        elif _has_prior_write(siblings[:index], var) or var in params:
            fragment.preloaded_outputs.append(var)
        fragment.used_after[var] = _is_used_after(tree, var, fragment.end_line)

    # A preloaded accumulator carries content into the loop, so it acts as an
    # input dataset too.
    for var in fragment.preloaded_outputs:
        if var not in fragment.input_datasets:
            fragment.input_datasets.append(var)


def _span_loop_vars(fragment: LoopFragment) -> set[str]:
    return {f.loop_var for f in _self_and_descendants(fragment) if f.loop_var}


def _self_and_descendants(fragment: LoopFragment):
    yield fragment
    for child in fragment.children:
        yield from _self_and_descendants(child)


def _find_fresh_init(preceding: list[ast.stmt], var: str) -> str | None:
    """Source of the empty-literal init of ``var``, if that is its latest write."""
    for stmt in reversed(preceding):
        if not _writes(stmt, var):
            continue
        if (
            isinstance(stmt, ast.Assign)
            and len(stmt.targets) == 1
            and isinstance(stmt.targets[0], ast.Name)
            and stmt.targets[0].id == var
        ):
            init = ast.unparse(stmt.value)
            if init in _EMPTY_INITS:
                return init
        return None
    return None


def _has_prior_write(preceding: list[ast.stmt], var: str) -> bool:
    return any(_writes(stmt, var) for stmt in preceding)


def _writes(stmt: ast.stmt, var: str) -> bool:
    for node in ast.walk(stmt):
        if isinstance(node, ast.Assign):
            if any(isinstance(t, ast.Name) and t.id == var for t in node.targets):
                return True
        elif isinstance(node, ast.AugAssign):
            if isinstance(node.target, ast.Name) and node.target.id == var:
                return True
        elif isinstance(node, ast.Call):
            func = node.func
            if (
                isinstance(func, ast.Attribute)
                and isinstance(func.value, ast.Name)
                and func.value.id == var
                and func.attr in ("append", "extend", "insert", "add", "sort")
            ):
                return True
    return False


def _is_used_after(tree: ast.Module, var: str, end_line: int) -> bool:
    for node in ast.walk(tree):
        if (
            isinstance(node, ast.Name)
            and node.id == var
            and isinstance(node.ctx, ast.Load)
            and node.lineno > end_line
        ):
            return True
    return False


def _enclosing_params(tree: ast.Module, line: int) -> set[str]:
    """Parameter names of the innermost function containing ``line``."""
    params: set[str] = set()
    for node in ast.walk(tree):
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            if node.lineno <= line <= (node.end_lineno or node.lineno):
                for arg in node.args.args + node.args.posonlyargs + node.args.kwonlyargs:
                    params.add(arg.arg)
    return params
