"""rddify: translate sequential Python loops into verified RDD-style pipelines.

The pipeline extracts loop fragments from a program, proposes ranked chains
of distributed API calls for each, rewrites the loop as lambda-wrapped
method calls, and accepts a rewrite only when the user's own tests pass
against it in an isolated sandbox.
"""

__version__ = "0.1.0"

from .driver import RunConfig, TranslationReport, run
from .errors import (
    BaselineFailed,
    EmptyPrediction,
    MalformedReport,
    NoTranslationFound,
    OverlappingSplices,
    ProgramSyntaxError,
    TranslatorError,
    Unrefactorable,
)
from .frontend import (
    LoopFragment,
    OperationRecord,
    OpKind,
    SourceProgram,
    extract_fragments,
    parse_program,
    to_extraction_json,
)
from .predictor import (
    ApiVocabulary,
    CandidateChain,
    LoopFeatures,
    enumerate_fallback,
    featurize,
    predict_top_k,
)
from .refactorer import RefactoredSnippet, refactor
from .verifier import VerificationReport, Verdict, verify_candidates

__all__ = [
    "ApiVocabulary",
    "BaselineFailed",
    "CandidateChain",
    "EmptyPrediction",
    "LoopFeatures",
    "LoopFragment",
    "MalformedReport",
    "NoTranslationFound",
    "OpKind",
    "OperationRecord",
    "OverlappingSplices",
    "ProgramSyntaxError",
    "RefactoredSnippet",
    "RunConfig",
    "SourceProgram",
    "TranslationReport",
    "TranslatorError",
    "Unrefactorable",
    "VerificationReport",
    "Verdict",
    "enumerate_fallback",
    "extract_fragments",
    "featurize",
    "parse_program",
    "predict_top_k",
    "refactor",
    "run",
    "to_extraction_json",
    "verify_candidates",
]
