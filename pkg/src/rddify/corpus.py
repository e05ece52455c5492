"""The bundled evaluation corpus.

Fourteen sequential programs with user tests, grouped into three suites by
how much API chaining their loops need.  Each entry records the program's
entry-point function and how many loop fragments extraction should find, so
the corpus tooling and the acceptance suite can check the corpus shape
without re-deriving it.
"""

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

SUITE_SIMPLE = "simple_operations"
SUITE_NESTED = "nested_operations"
SUITE_COMPLEX = "complex_operations"

SUITES = (SUITE_SIMPLE, SUITE_NESTED, SUITE_COMPLEX)


@dataclass(frozen=True)
class CorpusProgram:
    name: str
    suite: str
    fragments: int

    @property
    def entry(self) -> str:
        return self.name

    @property
    def filename(self) -> str:
        return f"{self.name}.py"

    @property
    def test_filename(self) -> str:
        return f"test_{self.name}.py"

    def program_path(self) -> Path:
        return corpus_dir() / self.suite / self.filename

    def tests_path(self) -> Path:
        return corpus_dir() / self.suite / self.test_filename


CORPUS: tuple[CorpusProgram, ...] = (
    CorpusProgram("filter_count", SUITE_SIMPLE, fragments=1),
    CorpusProgram("filter_reduce", SUITE_SIMPLE, fragments=1),
    CorpusProgram("map_reduce", SUITE_SIMPLE, fragments=1),
    CorpusProgram("map_sum", SUITE_SIMPLE, fragments=1),
    CorpusProgram("multiple_loop", SUITE_SIMPLE, fragments=2),
    CorpusProgram("reduce", SUITE_SIMPLE, fragments=1),
    CorpusProgram("flatmap", SUITE_NESTED, fragments=2),
    CorpusProgram("flatmap_count", SUITE_NESTED, fragments=2),
    CorpusProgram("join", SUITE_NESTED, fragments=2),
    CorpusProgram("union", SUITE_NESTED, fragments=2),
    CorpusProgram("union_count", SUITE_NESTED, fragments=2),
    CorpusProgram("flatmap_distinct_count", SUITE_COMPLEX, fragments=3),
    CorpusProgram("flatmap_filter_sort", SUITE_COMPLEX, fragments=3),
    CorpusProgram("map_distinct_sort", SUITE_COMPLEX, fragments=3),
)


def corpus_dir() -> Path:
    return Path(resources.files("rddify").joinpath("corpus_data"))


def by_suite(suite: str) -> tuple[CorpusProgram, ...]:
    return tuple(p for p in CORPUS if p.suite == suite)


def by_name(name: str) -> CorpusProgram:
    for program in CORPUS:
        if program.name == name:
            return program
    raise KeyError(name)
