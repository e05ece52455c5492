"""Assemble the translated program text.

Each verified fragment's line span is replaced in place by a splice region:
context acquisition, one ``<d>_rdd = sc.parallelize(<d>)`` line per dataset
the snippet consumes, the snippet itself, and a context stop.  Every region
is indented exactly like the loop header it replaces, and all lines outside
fragment spans are carried over byte for byte.  A single context-factory
definition is prepended to the file when at least one splice happens.

The emitted API calls are the same for every backend; only the factory body
differs (the bundled local runtime versus a cluster client).
"""

from dataclasses import dataclass

from .errors import OverlappingSplices
from .frontend import LoopFragment, SourceProgram
from .refactorer import RefactoredSnippet
from .runtime import SHIM_MODULE_NAME

BACKEND_SHIM = "shim"
BACKEND_SPARK = "spark"

BOOTSTRAP_NAME = "get_or_create_spark_context"

_SHIM_BOOTSTRAP = '''\
def get_or_create_spark_context(app_name="{app_name}"):
    import {shim} as _runtime
    return _runtime.get_or_create_context(app_name)
'''

_SPARK_BOOTSTRAP = '''\
def get_or_create_spark_context(app_name="{app_name}"):
    from pyspark import SparkConf, SparkContext
    conf = SparkConf().setAppName(app_name).setMaster("local[*]")
    return SparkContext.getOrCreate(conf=conf)
'''


@dataclass(frozen=True)
class SplicePlan:
    """Where and how one snippet replaces its fragment."""

    fragment_id: int
    insert_at: int
    removed_span: tuple[int, int]
    parallelize_list: tuple[str, ...]
    skip_secondary_parallelize: bool
    indent: str


def emit_bootstrap(backend: str = BACKEND_SHIM, app_name: str = "rddify") -> str:
    """The context-factory definition, emitted once per output file."""
    if backend == BACKEND_SHIM:
        template = _SHIM_BOOTSTRAP
    elif backend == BACKEND_SPARK:
        template = _SPARK_BOOTSTRAP
    else:
        raise ValueError(f"unknown backend: {backend!r}")
    return template.format(app_name=app_name, shim=SHIM_MODULE_NAME)


def plan_splice(fragment: LoopFragment, snippet: RefactoredSnippet) -> SplicePlan:
    """Decide parallelization and placement for one verified snippet."""

    def base(name: str | None) -> str | None:
        return name.removesuffix("_rdd") if name else None

    datasets = [base(snippet.primary_dataset)]
    uses_flat_map = "flatMap" in snippet.chain.ops
    if snippet.secondary_dataset and not uses_flat_map:
        datasets.append(base(snippet.secondary_dataset))

    return SplicePlan(
        fragment_id=fragment.id,
        insert_at=fragment.start_line,
        removed_span=(fragment.start_line, fragment.end_line),
        parallelize_list=tuple(datasets),
        skip_secondary_parallelize=uses_flat_map,
        indent=fragment.header_indent,
    )


def generate_program(
    program: SourceProgram,
    snippets: list[RefactoredSnippet],
    backend: str = BACKEND_SHIM,
    app_name: str | None = None,
) -> str:
    """Splice every snippet into the program and return the full output text.

    With no snippets the input text is returned unchanged, byte for byte.
    """
    if not snippets:
        return program.text

    plans = [plan_splice(snippet.fragment, snippet) for snippet in snippets]
    _check_disjoint(plans)

    lines = list(program.lines)
    for plan, snippet in sorted(
        zip(plans, snippets), key=lambda pair: pair[0].insert_at, reverse=True
    ):
        start, end = plan.removed_span
        region = [f"{plan.indent}sc = {BOOTSTRAP_NAME}()"]
        region += [
            f"{plan.indent}{dataset}_rdd = sc.parallelize({dataset})"
            for dataset in plan.parallelize_list
        ]
        region += [plan.indent + line for line in snippet.text.splitlines()]
        region.append(f"{plan.indent}sc.stop()")
        lines[start - 1:end] = region

    name = app_name or program.path.stem
    header = emit_bootstrap(backend, app_name=name).splitlines()
    lines = header + [""] + lines

    text = "\n".join(lines)
    return text + "\n" if program.trailing_newline else text


def _check_disjoint(plans: list[SplicePlan]) -> None:
    spans = sorted(plan.removed_span for plan in plans)
    for (_, prev_end), (next_start, _) in zip(spans, spans[1:]):
        if next_start <= prev_end:
            raise OverlappingSplices(
                f"splice spans overlap around lines {next_start}..{prev_end}"
            )
