"""Candidate-chain prediction over the distributed-API vocabulary.

A candidate chain is an ordered sequence of API calls (length 1 to 3) drawn
from a fixed vocabulary and filtered for type consistency: aggregators and
collectors (``reduce``, ``sum``, ``count``, ``collect``, ``take``) may only
terminate a chain, and the two-dataset operations (``join``, ``union``) may
only open one.

Ranking is deterministic.  The default predictor scores chains with a fixed
rule table over syntactic loop features (no learned model involved); an
enumerative fallback can extend the candidate stream with every vocabulary
chain compatible with the fragment's dataset arity, shortest chains first.
An external ranker can be plugged in through a one-line-per-chain text
protocol (see :func:`run_plugin_predictor`).
"""

import ast
import itertools
import shlex
import subprocess
from dataclasses import dataclass

from .errors import EmptyPrediction
from .frontend import LoopFragment, OperationRecord, OpKind, to_extraction_json

BASE_OPS = frozenset({
    "map", "filter", "reduce", "join", "union", "sortBy", "groupByKey",
    "flatMap", "sum", "count", "distinct", "take", "collect",
})
TERMINAL_ONLY = frozenset({"reduce", "sum", "count", "collect", "take"})
FIRST_ONLY = frozenset({"join", "union"})
AGGREGATORS = frozenset({"reduce", "sum", "count"})

ORIGIN_HEURISTIC = "Heuristic"
ORIGIN_ENUMERATED = "Enumerated"

DEFAULT_TOP_K = 5


@dataclass(frozen=True)
class CandidateChain:
    """One ranked proposal: an ordered chain of API calls."""

    ops: tuple[str, ...]
    score: float
    origin: str = ORIGIN_HEURISTIC

    def label(self) -> str:
        return ",".join(self.ops)


@dataclass(frozen=True)
class ApiVocabulary:
    """The permitted chains, ordered by length then lexicographically."""

    base_ops: frozenset[str]
    labels: tuple[tuple[str, ...], ...]

    @classmethod
    def default(cls, max_len: int = 3) -> "ApiVocabulary":
        labels = []
        ordered_ops = sorted(BASE_OPS)
        for length in range(1, max_len + 1):
            for combo in itertools.product(ordered_ops, repeat=length):
                if chain_is_valid(combo):
                    labels.append(combo)
        return cls(base_ops=BASE_OPS, labels=tuple(labels))

    def __contains__(self, ops: tuple[str, ...]) -> bool:
        return tuple(ops) in set(self.labels)


def chain_is_valid(ops) -> bool:
    """Type-consistency filter for a chain of op names."""
    ops = tuple(ops)
    if not ops or any(op not in BASE_OPS for op in ops):
        return False
    last = len(ops) - 1
    for position, op in enumerate(ops):
        if op in FIRST_ONLY and position != 0:
            return False
        if op in TERMINAL_ONLY and position != last:
            return False
    return True


DEFAULT_VOCABULARY = ApiVocabulary.default()


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LoopFeatures:
    """Deterministic syntactic features of one loop fragment."""

    has_condition: bool
    has_append: bool
    has_accumulation: bool
    accumulation_operator: str | None
    has_transform_call: bool
    nested_depth: int
    dataset_count: int
    appends_inner_items: bool
    # refinements used by the ranking rules
    own_condition: bool
    condition_on_output: bool
    append_is_identity: bool
    append_transform: str | None
    accumulates_literal_one: bool
    accumulates_loop_var: bool
    accumulation_transform: str | None
    has_sort_call: bool
    preloaded_append_target: bool
    inner_counts_items: bool
    key_equality_join: bool


def featurize(fragment: LoopFragment) -> LoopFeatures:
    """Compute the feature record the ranking rules run on."""
    ops = fragment.operations
    own = fragment.own_operations()
    loop_var = fragment.loop_var
    outputs = set(fragment.output_datasets)

    appends = [op for op in ops if op.kind is OpKind.METHOD_CALL and op.method == "append"]
    own_appends = [op for op in own if op.kind is OpKind.METHOD_CALL and op.method == "append"]
    own_accums = [op for op in own if op.kind is OpKind.AUGMENTED_ASSIGN]
    own_assigns = [op for op in own if op.kind is OpKind.ASSIGN]
    own_conditions = [op for op in own if op.kind is OpKind.CONDITIONAL]
    any_accums = [op for op in ops if op.kind is OpKind.AUGMENTED_ASSIGN]

    append_is_identity = bool(
        own_appends and loop_var and own_appends[0].value_source == loop_var
    )
    append_transform = None
    if own_appends and loop_var and not append_is_identity:
        value = own_appends[0].value_source
        if value is not None and _references_only(value, loop_var):
            append_transform = value

    accum_literal_one = False
    accum_loop_var = False
    accum_transform = None
    if own_accums and loop_var:
        value = _resolve_through_assigns(own_accums[0].value_source, own_assigns)
        if own_accums[0].value_source == "1" and own_accums[0].op_symbol == "+":
            accum_literal_one = True
        elif value == loop_var:
            accum_loop_var = True
        elif value is not None and _references_only(value, loop_var):
            accum_transform = value

    condition_on_output = bool(
        own_conditions
        and loop_var
        and _is_membership_test(own_conditions[0].expression, loop_var, outputs)
    )

    has_sort_call = any(
        op.kind is OpKind.METHOD_CALL and op.method == "sort" and op.receiver in outputs
        for op in ops
    )

    inner_identity, inner_counts = _inner_loop_pattern(fragment)

    transform_value = append_transform or accum_transform
    has_transform_call = bool(transform_value and _contains_call(transform_value))

    return LoopFeatures(
        has_condition=any(op.kind is OpKind.CONDITIONAL for op in ops),
        has_append=bool(appends),
        has_accumulation=bool(any_accums),
        accumulation_operator=any_accums[0].op_symbol if any_accums else None,
        has_transform_call=has_transform_call,
        nested_depth=fragment.nested_depth,
        dataset_count=len(fragment.input_datasets),
        appends_inner_items=inner_identity,
        own_condition=bool(own_conditions),
        condition_on_output=condition_on_output,
        append_is_identity=append_is_identity,
        append_transform=append_transform,
        accumulates_literal_one=accum_literal_one,
        accumulates_loop_var=accum_loop_var,
        accumulation_transform=accum_transform,
        has_sort_call=has_sort_call,
        preloaded_append_target=bool(
            own_appends and own_appends[0].receiver in fragment.preloaded_outputs
        ),
        inner_counts_items=inner_counts,
        key_equality_join=_has_key_equality(fragment),
    )


def _inner_loop_pattern(fragment: LoopFragment) -> tuple[bool, bool]:
    """(inner loop appends its own items, inner loop counts its items)."""
    for child in fragment.children:
        if child.iterable != fragment.loop_var or not child.loop_var:
            continue
        for op in child.own_operations():
            if (
                op.kind is OpKind.METHOD_CALL
                and op.method == "append"
                and op.value_source == child.loop_var
            ):
                return True, False
            if (
                op.kind is OpKind.AUGMENTED_ASSIGN
                and op.value_source == "1"
                and op.op_symbol == "+"
            ):
                return False, True
    return False, False


def _has_key_equality(fragment: LoopFragment) -> bool:
    """Nested two-dataset loop whose condition equates outer and inner keys."""
    if not fragment.loop_var:
        return False
    for child in fragment.children:
        if not child.loop_var or child.iterable == fragment.loop_var:
            continue
        for op in fragment.operations:
            if op.kind is not OpKind.CONDITIONAL or op.owner_loop_var != child.loop_var:
                continue
            if _is_key_equality(op.expression, fragment.loop_var, child.loop_var):
                return True
    return False


def _parse_expression(source: str) -> ast.expr | None:
    try:
        return ast.parse(source, mode="eval").body
    except SyntaxError:
        return None


def _builtin_names() -> frozenset:
    import builtins

    return frozenset(dir(builtins))


_BUILTINS = _builtin_names()


def _references_only(source: str, loop_var: str) -> bool:
    """True when every non-builtin name in ``source`` is the loop variable."""
    node = _parse_expression(source)
    if node is None:
        return False
    names = {n.id for n in ast.walk(node) if isinstance(n, ast.Name)}
    if loop_var not in names:
        return False
    return all(name == loop_var or name in _BUILTINS for name in names)


def _resolve_through_assigns(value: str | None, assigns: list[OperationRecord]) -> str | None:
    """Follow one hop of ``tmp = f(x); acc += tmp`` indirection."""
    if value is None:
        return None
    for assign in assigns:
        if assign.target == value:
            return assign.value_source
    return value


def _is_membership_test(source: str, loop_var: str, outputs: set[str]) -> bool:
    node = _parse_expression(source)
    if not isinstance(node, ast.Compare) or len(node.ops) != 1:
        return False
    if not isinstance(node.ops[0], ast.NotIn):
        return False
    left, right = node.left, node.comparators[0]
    return (
        isinstance(left, ast.Name) and left.id == loop_var
        and isinstance(right, ast.Name) and right.id in outputs
    )


def _is_key_equality(source: str, outer_var: str, inner_var: str) -> bool:
    node = _parse_expression(source)
    if not isinstance(node, ast.Compare) or len(node.ops) != 1:
        return False
    if not isinstance(node.ops[0], ast.Eq):
        return False
    sides = [node.left, node.comparators[0]]
    referenced = []
    for side in sides:
        names = {n.id for n in ast.walk(side) if isinstance(n, ast.Name)}
        referenced.append(names)
    return (
        outer_var in referenced[0] and inner_var in referenced[1]
        or outer_var in referenced[1] and inner_var in referenced[0]
    )


def _contains_call(source: str) -> bool:
    node = _parse_expression(source)
    return node is not None and any(isinstance(n, ast.Call) for n in ast.walk(node))


# ---------------------------------------------------------------------------
# Ranking rules
# ---------------------------------------------------------------------------

def _ranked_chains(f: LoopFeatures) -> list[tuple[str, ...]]:
    """Apply the rule table in priority order; earlier chains rank higher."""
    chains: list[tuple[str, ...]] = []

    def add(*proposals: tuple[str, ...]) -> None:
        for ops in proposals:
            if ops not in chains:
                chains.append(ops)

    # Deduplication loops: membership test against the accumulator itself.
    if f.condition_on_output and f.append_is_identity:
        if f.has_sort_call:
            add(("distinct", "sortBy"), ("distinct",))
        else:
            add(("distinct",), ("distinct", "sortBy"))

    # Plain conditional loops.
    if f.own_condition and not f.condition_on_output:
        if f.append_is_identity and not f.has_accumulation:
            if f.has_sort_call:
                add(("filter", "sortBy"), ("filter",))
            else:
                add(("filter",))
        if f.append_transform:
            add(("filter", "map"))
        if f.accumulates_literal_one:
            add(("filter", "count"))
        elif f.accumulates_loop_var:
            add(("filter", "reduce"), ("filter", "sum"))
        elif f.accumulation_transform:
            add(("filter", "map", "reduce"), ("filter", "map", "sum"))

    # Unconditional transform / copy / accumulation loops.
    if not f.own_condition:
        if f.append_transform:
            if f.has_sort_call:
                add(("map", "sortBy"), ("map",))
            else:
                add(("map",))
            if f.append_transform.startswith("len("):
                add(("count",))
        if f.append_is_identity and not f.preloaded_append_target:
            if f.has_sort_call:
                add(("sortBy",), ("map", "sortBy"))
            else:
                add(("map",))
        if f.accumulates_literal_one:
            add(("count",))
        elif f.accumulates_loop_var:
            add(("reduce",), ("sum",))
        elif f.accumulation_transform:
            add(("map", "reduce"), ("map", "sum"))

    # Nested-loop shapes.
    if f.appends_inner_items:
        if f.has_sort_call:
            add(("flatMap", "sortBy"))
        add(("flatMap",))
    if f.inner_counts_items:
        add(("flatMap", "count"))
    if f.key_equality_join:
        add(("join",))
    if f.preloaded_append_target and f.append_is_identity and not f.own_condition:
        add(("union",))

    return chains


def _rescore(ordered_ops: list[tuple[tuple[str, ...], str]]) -> list[CandidateChain]:
    return [
        CandidateChain(ops=ops, score=1.0 / (1 + rank), origin=origin)
        for rank, (ops, origin) in enumerate(ordered_ops)
    ]


def predict_top_k(
    fragment: LoopFragment,
    k: int = DEFAULT_TOP_K,
    vocabulary: ApiVocabulary = DEFAULT_VOCABULARY,
) -> list[CandidateChain]:
    """Rank the most plausible chains for a fragment, best first.

    Raises :class:`EmptyPrediction` when no rule fires; callers with the
    enumerative fallback enabled catch that and continue.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    chains = [ops for ops in _ranked_chains(featurize(fragment)) if chain_is_valid(ops)]
    if not chains:
        raise EmptyPrediction(f"no ranking rule fired for fragment {fragment.id}")
    return _rescore([(ops, ORIGIN_HEURISTIC) for ops in chains[:k]])


def enumerate_fallback(
    fragment: LoopFragment,
    max_len: int = 3,
    vocabulary: ApiVocabulary = DEFAULT_VOCABULARY,
) -> list[CandidateChain]:
    """Every arity-compatible vocabulary chain, shortest first, then lexicographic."""
    if not 1 <= max_len <= 3:
        raise ValueError("max_len must be between 1 and 3")
    arity = featurize(fragment).dataset_count
    labels = [
        ops for ops in vocabulary.labels
        if len(ops) <= max_len and (arity >= 2 or ops[0] not in FIRST_ONLY)
    ]
    return _rescore([(ops, ORIGIN_ENUMERATED) for ops in labels])


def merge_candidates(*streams: list[CandidateChain]) -> list[CandidateChain]:
    """Concatenate candidate streams, drop duplicates, renumber scores.

    Earlier streams win ties, so heuristic candidates keep their precedence
    over enumerated ones.
    """
    merged: list[tuple[tuple[str, ...], str]] = []
    seen: set[tuple[str, ...]] = set()
    for stream in streams:
        for candidate in stream:
            if candidate.ops not in seen:
                seen.add(candidate.ops)
                merged.append((candidate.ops, candidate.origin))
    return _rescore(merged)


# ---------------------------------------------------------------------------
# External predictor protocol
# ---------------------------------------------------------------------------

def parse_chain_line(line: str) -> tuple[str, ...] | None:
    """Parse one ranked-output line: comma-separated op names.

    Tolerates decoration like ``filter()`` or quoted labels; returns None
    for lines that do not name a valid vocabulary chain.
    """
    cleaned = line.strip().strip("'\"`")
    if not cleaned:
        return None
    ops = tuple(
        part.strip().strip("'\"`").removesuffix("()")
        for part in cleaned.split(",")
        if part.strip()
    )
    return ops if chain_is_valid(ops) else None


def run_plugin_predictor(
    command: str,
    fragment: LoopFragment,
    k: int = DEFAULT_TOP_K,
    timeout: float = 30.0,
) -> list[CandidateChain]:
    """Ask an external command to rank chains for a fragment.

    The command receives the fragment's extraction JSON on stdin and must
    print one chain per line, best first.  Lines that are not valid
    vocabulary chains are ignored.
    """
    proc = subprocess.run(
        shlex.split(command),
        input=to_extraction_json(fragment),
        capture_output=True,
        text=True,
        timeout=timeout,
    )
    if proc.returncode != 0:
        raise EmptyPrediction(
            f"predictor command failed with exit code {proc.returncode}: {proc.stderr.strip()}"
        )
    parsed = []
    for line in proc.stdout.splitlines():
        ops = parse_chain_line(line)
        if ops is not None and ops not in parsed:
            parsed.append(ops)
    if not parsed:
        raise EmptyPrediction("predictor command produced no valid chains")
    return _rescore([(ops, ORIGIN_HEURISTIC) for ops in parsed[:k]])
