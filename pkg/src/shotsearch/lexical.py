"""Concept/person retrieval from annotation probabilities and fuzzy text
retrieval over recognized on-screen words.

Words are NFC-normalized and case-folded so queries match despite OCR casing
noise; ranking similarity is 1 - levenshtein/max(len), computed over Unicode
scalar values so an umlaut counts as a single edit.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable

from .errors import UnknownLabelError
from .model import (
    AnnotationEntry,
    AnnotationKind,
    QueryKind,
    RankedResult,
    ShotRef,
    TextOccurrence,
)

DEFAULT_SIMILARITY_FLOOR = 0.6


def normalize_token(token: str) -> str:
    return unicodedata.normalize("NFC", token).casefold()


def tokenize(text: str) -> list[str]:
    """Split on whitespace and normalize; empty output means no usable text."""
    return [normalize_token(t) for t in text.split() if t]


def levenshtein(a: str, b: str) -> int:
    """Minimum insertions, deletions, and substitutions (unit cost) over
    Unicode scalar values."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    current = [0] * (len(b) + 1)
    for i, ca in enumerate(a, start=1):
        current[0] = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current[j] = min(
                previous[j] + 1,        # delete from a
                current[j - 1] + 1,     # insert into a
                previous[j - 1] + cost, # substitute
            )
        previous, current = current, previous
    return previous[len(b)]


def word_similarity(a: str, b: str) -> float:
    """1 - levenshtein/max(len); 1.0 for identical, 0.0 for disjoint."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


@dataclass(frozen=True)
class PostingList:
    """All shots annotated with one label, best probability first."""

    label: str
    kind: AnnotationKind
    postings: tuple[tuple[ShotRef, float], ...]


class PostingIndex:
    """Ranked lookup from (label, kind) to probability-sorted shots."""

    def __init__(self, entries: Iterable[AnnotationEntry] = ()):
        grouped: dict[tuple[AnnotationKind, str], list[tuple[ShotRef, float]]] = {}
        for entry in entries:
            grouped.setdefault((entry.kind, entry.label), []).append(
                (entry.shot, entry.probability)
            )
        self._lists: dict[tuple[AnnotationKind, str], PostingList] = {}
        for (kind, label), postings in grouped.items():
            postings.sort(key=lambda p: (-p[1], p[0].key))
            self._lists[(kind, label)] = PostingList(label, kind, tuple(postings))

    def __len__(self) -> int:
        return len(self._lists)

    def labels(self, kind: AnnotationKind) -> list[str]:
        kind = AnnotationKind(kind)
        return sorted(label for (k, label) in self._lists if k == kind)

    def posting_list(self, label: str, kind: AnnotationKind) -> PostingList:
        try:
            return self._lists[(AnnotationKind(kind), label)]
        except KeyError:
            raise UnknownLabelError(f"no such {AnnotationKind(kind).value}: {label!r}") from None

    def concept_search(self, label: str, kind: AnnotationKind, k: int) -> RankedResult:
        """Top-k shots for a label by stored probability, descending.

        Unknown labels raise UnknownLabelError rather than returning an
        empty result. Probabilities pass through unrescaled.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        plist = self.posting_list(label, kind)
        kind = AnnotationKind(kind)
        query_kind = QueryKind.CONCEPT if kind == AnnotationKind.CONCEPT else QueryKind.PERSON
        return RankedResult(entries=tuple(plist.postings[:k]), query_kind=query_kind)


class TextIndex:
    """Fuzzy word lookup: per query token, each shot is scored by its best
    word; multi-token scores are the mean over tokens."""

    def __init__(self, occurrences: Iterable[TextOccurrence] = (),
                 similarity_floor: float = DEFAULT_SIMILARITY_FLOOR):
        if not 0.0 <= similarity_floor <= 1.0:
            raise ValueError("similarity_floor must be in [0, 1]")
        self.similarity_floor = similarity_floor
        self.vocabulary: dict[str, list[tuple[ShotRef, int]]] = {}
        self._shot_words: dict[tuple[str, int], set[str]] = {}
        self._shots: dict[tuple[str, int], ShotRef] = {}
        for occ in occurrences:
            word = normalize_token(occ.word)
            self.vocabulary.setdefault(word, []).append((occ.shot, occ.frame_number))
            self._shot_words.setdefault(occ.shot.key, set()).add(word)
            self._shots[occ.shot.key] = occ.shot

    def __len__(self) -> int:
        return len(self.vocabulary)

    def text_search(self, query: str, k: int) -> RankedResult:
        """Shots ranked by edit-distance similarity to the query term(s);
        shots below the similarity floor are excluded."""
        if k < 1:
            raise ValueError("k must be >= 1")
        tokens = tokenize(query)
        if not tokens:
            raise ValueError("query is empty after normalization")
        per_shot = {key: 0.0 for key in self._shot_words}
        for token in tokens:
            sims = {w: word_similarity(token, w) for w in self.vocabulary}
            for key, words in self._shot_words.items():
                per_shot[key] += max(sims[w] for w in words)
        n = len(tokens)
        scored = [
            (total / n, key)
            for key, total in per_shot.items()
            if total / n >= self.similarity_floor
        ]
        scored.sort(key=lambda t: (-t[0], t[1]))
        entries = tuple((self._shots[key], sim) for sim, key in scored[:k])
        return RankedResult(entries=entries, query_kind=QueryKind.TEXT)
