"""Shared test helpers: fragment builders and shim-backed execution oracles."""

import random
import sys
from pathlib import Path

import pytest

from rddify.frontend import SourceProgram, extract_fragments, parse_program
from rddify.runtime import minirdd

RUNTIME_DIR = Path(minirdd.__file__).parent


def make_program(tmp_path: Path, source: str, name: str = "prog.py") -> SourceProgram:
    path = tmp_path / name
    path.write_text(source, encoding="utf-8")
    return parse_program(path)


def fragments_from(tmp_path: Path, source: str, name: str = "prog.py"):
    program = make_program(tmp_path, source, name)
    return program, extract_fragments(program)


def run_snippet(snippet_text: str, datasets: dict, extra_env: dict | None = None):
    """Execute one refactored snippet under the shim and return its result.

    Parallelizes every dataset the snippet references, mirroring what the
    generated splice region does.
    """
    context = minirdd.get_or_create_context("test")
    namespace = dict(datasets)
    namespace.update(extra_env or {})
    for name, value in datasets.items():
        namespace[f"{name}_rdd"] = context.parallelize(value)
    exec(snippet_text, namespace)
    context.stop()
    result_var = snippet_text.split(" = ", 1)[0].strip()
    return namespace[result_var]


def run_sequential(function_source: str, *args):
    """Execute a sequential function definition and call it."""
    namespace: dict = {}
    exec(function_source, namespace)
    functions = [v for v in namespace.values() if callable(v)]
    return functions[0](*args)


@pytest.fixture
def rng():
    return random.Random(20240817)


@pytest.fixture(scope="session")
def runtime_on_path():
    """Make the vendored runtime importable as a top-level ``minirdd``."""
    sys.path.insert(0, str(RUNTIME_DIR))
    yield RUNTIME_DIR
    sys.path.remove(str(RUNTIME_DIR))
