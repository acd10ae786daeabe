"""Retrieval engine for shot-segmented video archives.

Indexes per-keyframe binary codes, concept/person annotations, and
recognized on-screen text; answers similarity, concept, person, and text
queries as ranked shot lists; ships an average-precision evaluation harness,
an HTTP service, and an operations CLI.
"""

from .errors import (
    ChecksumError,
    CodeWidthError,
    FormatError,
    MissingSpaceError,
    ShotSearchError,
    UnknownLabelError,
    UnknownShotError,
    ValidationFailure,
)
from .evaluation import (
    EvalReport,
    RelevanceJudgments,
    average_precision,
    evaluate_run,
    mean_ap,
)
from .hashing import HyperplaneHasher, as_feature_vector
from .lexical import PostingIndex, TextIndex, levenshtein, word_similarity
from .model import (
    AnnotationEntry,
    AnnotationKind,
    BinaryCode,
    CodeRecord,
    CodeSpace,
    Keyframe,
    QueryKind,
    RankedResult,
    ShotRef,
    TextOccurrence,
    ValidationReport,
    derive_keyframes,
    validate_shot_table,
)
from .search import (
    KeyframeRanking,
    QueryCodes,
    ShotScore,
    SimilarityQuery,
    SimilaritySearcher,
    SpaceIndex,
    keyframes_to_shots,
)
from .store import CodeStore, KeyframeTable
from .vptree import VantagePointTree, hamming, refine256

__version__ = "0.1.0"

__all__ = [
    "AnnotationEntry",
    "AnnotationKind",
    "BinaryCode",
    "ChecksumError",
    "CodeRecord",
    "CodeSpace",
    "CodeStore",
    "CodeWidthError",
    "EvalReport",
    "FormatError",
    "HyperplaneHasher",
    "Keyframe",
    "KeyframeRanking",
    "KeyframeTable",
    "MissingSpaceError",
    "PostingIndex",
    "QueryCodes",
    "QueryKind",
    "RankedResult",
    "RelevanceJudgments",
    "ShotRef",
    "ShotScore",
    "ShotSearchError",
    "SimilarityQuery",
    "SimilaritySearcher",
    "SpaceIndex",
    "TextIndex",
    "TextOccurrence",
    "UnknownLabelError",
    "UnknownShotError",
    "ValidationFailure",
    "ValidationReport",
    "VantagePointTree",
    "as_feature_vector",
    "average_precision",
    "derive_keyframes",
    "evaluate_run",
    "hamming",
    "keyframes_to_shots",
    "levenshtein",
    "mean_ap",
    "refine256",
    "validate_shot_table",
    "word_similarity",
]
