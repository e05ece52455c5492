"""Rewrite a loop fragment into a chain of RDD-style method calls.

Each API call in a candidate chain maps to one rendered segment: predicates
and transforms are wrapped into lambdas over the loop variable, aggregators
read their operator off the fragment's augmented assignment, and the
two-dataset operations open the chain on both datasets.  The rendered chain
is applied to the primary dataset (suffixed ``_rdd``) and assigned to the
fragment's result variable, with a trailing ``.collect()`` when the original
code kept using the result as a plain list.

Refactoring only guarantees well-formed output for a chain that fits the
fragment's shape; semantic equivalence is the verifier's job.  A chain that
does not fit raises :class:`Unrefactorable`, which tells the driver to move
on to the next candidate.
"""

import ast
from dataclasses import dataclass

from .errors import Unrefactorable
from .frontend import LoopFragment, OperationRecord, OpKind
from .predictor import AGGREGATORS, CandidateChain, chain_is_valid

# chains ending in one of these already materialize a plain value
_TERMINAL_RESULTS = AGGREGATORS | {"collect", "take"}

# accumulator initializers that a seedless reduce/sum can absorb
_NEUTRAL_INITS = {
    "+": {"0", "0.0", "''", '""', "[]"},
    "*": {"1"},
}


@dataclass(frozen=True)
class RefactoredSnippet:
    """Target-API source text for one fragment."""

    text: str
    primary_dataset: str
    secondary_dataset: str | None
    result_var: str
    requires_collect: bool
    chain: CandidateChain
    fragment: LoopFragment

    @property
    def chain_expression(self) -> str:
        """The right-hand side of the snippet's assignment."""
        return self.text.split(" = ", 1)[1]


# ---------------------------------------------------------------------------
# Lambda and call builders
# ---------------------------------------------------------------------------

def build_predicate_lambda(op: OperationRecord, loop_var: str,
                           forbidden: tuple[str, ...] = ()) -> str:
    """Wrap a conditional's test into ``lambda <loop_var>: <test>``."""
    if op.kind is not OpKind.CONDITIONAL:
        raise Unrefactorable(f"not a conditional: {op.expression!r}")
    _reject_forbidden_names(op.expression, loop_var, forbidden, "condition")
    return f"lambda {loop_var}: {op.expression}"


def build_transform_lambda(op: OperationRecord, loop_var: str,
                           forbidden: tuple[str, ...] = ()) -> str:
    """Wrap an assignment's RHS or an append's argument into a lambda."""
    if op.kind is OpKind.METHOD_CALL and op.method == "append":
        value = op.value_source
    elif op.kind in (OpKind.ASSIGN, OpKind.AUGMENTED_ASSIGN):
        value = op.value_source
    else:
        raise Unrefactorable(f"no transform expression in {op.expression!r}")
    if value is None:
        raise Unrefactorable(f"could not read a transform value from {op.expression!r}")
    _reject_forbidden_names(value, loop_var, forbidden, "transform")
    return f"lambda {loop_var}: {value}"


def build_aggregator(op_name: str, fragment: LoopFragment) -> str:
    """Render a terminal aggregator call (``reduce``/``sum``/``count``)."""
    if op_name == "count":
        return "count()"

    accums = [op for op in fragment.operations if op.kind is OpKind.AUGMENTED_ASSIGN]
    if not accums:
        raise Unrefactorable(f"{op_name} needs an accumulation inside the loop")
    accum = accums[0]
    init = fragment.accumulator_inits.get(accum.target)

    if op_name == "reduce":
        if init not in _NEUTRAL_INITS.get(accum.op_symbol, set()):
            raise Unrefactorable(
                "reduce has no seed value; the accumulator must start from a neutral literal"
            )
        return f"reduce(lambda a, b: a {accum.op_symbol} b)"
    if op_name == "sum":
        if accum.op_symbol != "+" or init not in ("0", "0.0"):
            raise Unrefactorable("sum requires a numeric accumulator starting at zero")
        return "sum()"
    raise Unrefactorable(f"unknown aggregator: {op_name}")


def build_binary_op(op_name: str, primary: str, secondary: str | None) -> str:
    """Render a two-dataset chain opener (``join``/``union``)."""
    if op_name not in ("join", "union"):
        raise Unrefactorable(f"not a two-dataset operation: {op_name}")
    if not secondary:
        raise Unrefactorable(f"{op_name} needs a secondary dataset")
    return f"{primary}_rdd.{op_name}({secondary}_rdd)"


def _reject_forbidden_names(source: str, loop_var: str,
                            forbidden: tuple[str, ...], what: str) -> None:
    try:
        node = ast.parse(source, mode="eval").body
    except SyntaxError:
        raise Unrefactorable(f"{what} does not parse as an expression: {source!r}") from None
    names = {n.id for n in ast.walk(node) if isinstance(n, ast.Name)}
    blocked = sorted((names - {loop_var}) & set(forbidden))
    if blocked:
        raise Unrefactorable(
            f"{what} references loop-owned state: {', '.join(blocked)}"
        )


# ---------------------------------------------------------------------------
# Whole-chain refactoring
# ---------------------------------------------------------------------------

def refactor(fragment: LoopFragment, chain: CandidateChain) -> RefactoredSnippet:
    """Instantiate a candidate chain on a fragment."""
    if not chain_is_valid(chain.ops):
        raise Unrefactorable(f"chain is not vocabulary-valid: {chain.ops}")
    if not fragment.translatable:
        raise Unrefactorable(fragment.reason or "fragment marked untranslatable")

    builder = _ChainBuilder(fragment)
    head, rest = chain.ops[0], chain.ops[1:]

    if head in ("join", "union"):
        primary, secondary = builder.binary_datasets(head)
        expr = build_binary_op(head, primary, secondary)
    else:
        primary, secondary = builder.primary_dataset(), None
        expr = f"{primary}_rdd"
        rest = chain.ops

    for op_name in rest:
        expr += "." + builder.render(op_name, chain)

    result_var = builder.result_var(chain)
    requires_collect = (
        fragment.used_after.get(result_var, False)
        and chain.ops[-1] not in _TERMINAL_RESULTS
    )
    if requires_collect:
        expr += ".collect()"

    text = f"{result_var} = {expr}"
    try:
        ast.parse(text)
    except SyntaxError:  # pragma: no cover - guarded by the builders
        raise Unrefactorable(f"rendered snippet does not parse: {text!r}") from None

    return RefactoredSnippet(
        text=text,
        primary_dataset=f"{primary}_rdd",
        secondary_dataset=f"{secondary}_rdd" if secondary else None,
        result_var=result_var,
        requires_collect=requires_collect,
        chain=chain,
        fragment=fragment,
    )


class _ChainBuilder:
    """Per-fragment rendering context shared across a chain's segments."""

    def __init__(self, fragment: LoopFragment):
        self.fragment = fragment
        # Names a lambda body must not capture: the loop's own outputs and
        # every loop variable other than the lambda's parameter.
        self.forbidden = tuple(fragment.output_datasets) + tuple(
            f.loop_var for f in _nest(fragment) if f.loop_var
        )

    def primary_dataset(self) -> str:
        if not self.fragment.iterable:
            raise Unrefactorable("fragment has no named input dataset")
        return self.fragment.iterable

    def binary_datasets(self, op_name: str) -> tuple[str, str]:
        fragment = self.fragment
        if op_name == "join":
            inner = self._independent_inner_loop()
            if inner is None or not _has_join_condition(fragment, inner):
                raise Unrefactorable("join needs a nested loop over a second keyed dataset")
            return self.primary_dataset(), inner.iterable
        # union: the preloaded accumulator keeps its contents and the
        # iterated dataset is concatenated onto it.
        append = self._own_append()
        if append is None or append.receiver not in fragment.preloaded_outputs:
            raise Unrefactorable("union needs an append onto an already-populated dataset")
        return append.receiver, self.primary_dataset()

    def render(self, op_name: str, chain: CandidateChain) -> str:
        fragment = self.fragment
        if op_name == "filter":
            condition = self._plain_condition()
            if condition is None:
                raise Unrefactorable("filter needs a loop condition")
            lambda_var = condition.owner_loop_var or fragment.loop_var
            return f"filter({build_predicate_lambda(condition, lambda_var, self._allowed(lambda_var))})"
        if op_name == "map":
            source_op, lambda_var = self._transform_op()
            if source_op is None:
                return f"map(lambda {fragment.loop_var}: {fragment.loop_var})"
            return f"map({build_transform_lambda(source_op, lambda_var, self._allowed(lambda_var))})"
        if op_name == "flatMap":
            features_ok = any(
                child.iterable == fragment.loop_var for child in fragment.children
            )
            if not features_ok:
                raise Unrefactorable("flatMap needs a nested loop over the outer loop's items")
            return "flatMap(lambda x: x)"
        if op_name in AGGREGATORS:
            return build_aggregator(op_name, fragment)
        if op_name == "sortBy":
            if len(chain.ops) == 1:
                source_op, lambda_var = self._transform_op()
                if source_op is not None and source_op.value_source:
                    return f"sortBy(lambda {lambda_var}: {source_op.value_source})"
            return "sortBy(lambda x: x)"
        if op_name == "distinct":
            return "distinct()"
        if op_name == "groupByKey":
            return "groupByKey()"
        if op_name == "collect":
            return "collect()"
        if op_name == "take":
            raise Unrefactorable("take needs an element count, which loops do not state")
        raise Unrefactorable(f"no rendering rule for {op_name}")

    def result_var(self, chain: CandidateChain) -> str:
        fragment = self.fragment
        accum = next(
            (op.target for op in fragment.operations if op.kind is OpKind.AUGMENTED_ASSIGN),
            None,
        )
        append = next(
            (op.receiver for op in fragment.operations
             if op.kind is OpKind.METHOD_CALL and op.method == "append"),
            None,
        )
        if chain.ops[-1] in AGGREGATORS:
            result = accum or append
        else:
            result = append or accum
        if result is None:
            raise Unrefactorable("fragment produces no result variable")
        return result

    # -- lookup helpers --

    def _independent_inner_loop(self) -> LoopFragment | None:
        for child in self.fragment.children:
            if child.iterable and child.iterable != self.fragment.loop_var:
                return child
        return None

    def _allowed(self, lambda_var: str) -> tuple[str, ...]:
        return tuple(name for name in self.forbidden if name != lambda_var)

    def _plain_condition(self) -> OperationRecord | None:
        for op in self.fragment.operations:
            if op.kind is OpKind.CONDITIONAL:
                return op
        return None

    def _own_append(self) -> OperationRecord | None:
        for op in self.fragment.own_operations():
            if op.kind is OpKind.METHOD_CALL and op.method == "append":
                return op
        return None

    def _transform_op(self) -> tuple[OperationRecord | None, str]:
        """The operation carrying this loop's per-element expression.

        Returns (None, loop_var) for identity appends, so ``map`` falls back
        to the identity lambda.
        """
        fragment = self.fragment
        loop_var = fragment.loop_var
        append = self._own_append()
        if append is not None and append.value_source:
            if append.value_source == loop_var:
                return None, loop_var
            return append, loop_var
        for op in fragment.own_operations():
            if op.kind is OpKind.AUGMENTED_ASSIGN and op.value_source:
                resolved = self._resolve_assign(op.value_source)
                if resolved.value_source == loop_var:
                    return None, loop_var
                return resolved, loop_var
        return None, loop_var

    def _resolve_assign(self, name: str) -> OperationRecord:
        for op in self.fragment.own_operations():
            if op.kind is OpKind.ASSIGN and op.target == name:
                return op
        # Synthesize a record so the accumulated expression itself is the
        # transform (covers ``total += len(word)``).
        return OperationRecord(
            kind=OpKind.ASSIGN,
            expression=name,
            variables=(),
            line=self.fragment.start_line,
            target=None,
            value_source=name,
            owner_loop_var=self.fragment.loop_var,
        )


def _nest(fragment: LoopFragment):
    yield fragment
    for child in fragment.children:
        yield from _nest(child)


def _has_join_condition(fragment: LoopFragment, inner: LoopFragment) -> bool:
    from .predictor import _is_key_equality  # shared condition analysis

    for op in fragment.operations:
        if op.kind is OpKind.CONDITIONAL and op.owner_loop_var == inner.loop_var:
            if _is_key_equality(op.expression, fragment.loop_var, inner.loop_var):
                return True
    return False
