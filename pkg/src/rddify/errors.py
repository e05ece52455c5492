"""Exception types shared across the translation pipeline."""


class TranslatorError(Exception):
    """Base class for every error raised by rddify."""


class ProgramSyntaxError(TranslatorError):
    """The input program does not parse.

    Carries the offending location so the CLI can point at it.
    """

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None, text: str | None = None):
        super().__init__(message)
        self.line = line
        self.column = column
        self.text = text

    def __str__(self) -> str:
        where = f" (line {self.line}, column {self.column})" if self.line else ""
        return f"{self.args[0]}{where}"


class EmptyPrediction(TranslatorError):
    """No ranking rule fired for a fragment and enumeration is unavailable."""


class Unrefactorable(TranslatorError):
    """A candidate chain cannot be instantiated on a fragment.

    This is a per-candidate signal: the driver skips to the next candidate.
    """

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class MalformedReport(TranslatorError):
    """The test runner's XML report could not be parsed."""


class NoTranslationFound(TranslatorError):
    """Every candidate for a fragment was rejected, unrefactorable, or crashed."""

    def __init__(self, fragment_id: int, attempts: list | None = None):
        super().__init__(f"no translation found for fragment {fragment_id}")
        self.fragment_id = fragment_id
        self.attempts = attempts or []


class OverlappingSplices(TranslatorError):
    """Two splice plans target intersecting line spans."""


class BaselineFailed(TranslatorError):
    """The original program does not pass its own tests; translation refused."""
