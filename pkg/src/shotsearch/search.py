"""Two-stage similarity search: coarse 64-bit shortlist per code space,
exact 256-bit refinement, semantic/low-level blending, and keyframe-to-shot
aggregation.

The second stage is a filter, never a re-scorer: 64-bit codes only decide
shortlist membership, final distances come from the 256-bit codes alone.
Blended distances are normalized by code width so the semantic weight alpha
mixes comparable scales.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingSpaceError
from .hashing import HyperplaneHasher, as_feature_vector
from .model import (
    KEYFRAMES_PER_SHOT,
    BinaryCode,
    CodeSpace,
    Keyframe,
    QueryKind,
    RankedResult,
    ShotRef,
)
from .store import CodeStore, KeyframeTable
from .vptree import VantagePointTree, hamming256_for

DEFAULT_SHORTLIST = 10_000


@dataclass(frozen=True)
class QueryCodes:
    """The (64-bit, 256-bit) code pair of a query image in one code space."""

    code64: BinaryCode
    code256: BinaryCode

    def __post_init__(self):
        if self.code64.width != 64 or self.code256.width != 256:
            raise ValueError("query needs a 64-bit and a 256-bit code")


@dataclass(frozen=True)
class SimilarityQuery:
    """One similarity query; alpha is the semantic weight in [0, 1]."""

    semantic: QueryCodes | None = None
    low_level: QueryCodes | None = None
    alpha: float = 1.0
    k_shots: int = 100
    shortlist_size: int = DEFAULT_SHORTLIST

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha {self.alpha} outside [0, 1]")
        if self.alpha > 0.0 and self.semantic is None:
            raise ValueError("alpha > 0 requires semantic query codes")
        if self.alpha < 1.0 and self.low_level is None:
            raise ValueError("alpha < 1 requires low-level query codes")
        if self.k_shots < 1:
            raise ValueError("k_shots must be >= 1")
        if self.shortlist_size < 1:
            raise ValueError("shortlist_size must be >= 1")


@dataclass(frozen=True)
class ShotScore:
    """A shot with its best (minimum) blended keyframe distance."""

    shot: ShotRef
    best_distance: float
    score: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "score", 1.0 / (1.0 + self.best_distance))


@dataclass
class KeyframeRanking:
    """Keyframe ordinals with blended distances, ascending."""

    table: KeyframeTable
    ordinals: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return self.ordinals.shape[0]

    def keyframe(self, rank: int) -> Keyframe:
        return self.table.keyframe(int(self.ordinals[rank]))


@dataclass
class SpaceIndex:
    """A code store together with its fitted coarse-stage tree."""

    store: CodeStore
    tree: VantagePointTree

    @classmethod
    def build(cls, store: CodeStore, leaf_size=32, random_state=0) -> "SpaceIndex":
        tree = VantagePointTree(leaf_size=leaf_size, random_state=random_state).fit(store)
        return cls(store=store, tree=tree)


def keyframes_to_shots(ranking: KeyframeRanking, k_shots: int) -> list[ShotScore]:
    """Collapse an ascending keyframe ranking to shots.

    The first (hence minimum-distance) keyframe of each shot wins; shots are
    ordered by ascending best distance with ties by shot id, and the list is
    deduplicated before truncating to k_shots.
    """
    shot_ords = ranking.table.shot_of_keyframe(ranking.ordinals)
    uniq, first_idx = np.unique(shot_ords, return_index=True)
    table = ranking.table
    scored = []
    for shot_ord, idx in zip(uniq, first_idx):
        ref = table.shot_ref(int(shot_ord))
        scored.append((float(ranking.distances[idx]), ref.key, ref))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [ShotScore(ref, dist) for dist, _, ref in scored[:k_shots]]


class SimilaritySearcher:
    """Stateless query orchestrator over immutable per-space indexes."""

    def __init__(self, semantic: SpaceIndex | None, low_level: SpaceIndex | None = None):
        if semantic is None and low_level is None:
            raise ValueError("at least one code space must be indexed")
        if semantic is not None and low_level is not None:
            if semantic.store.table is not low_level.store.table:
                raise ValueError("both spaces must index the same keyframe table")
        self.semantic = semantic
        self.low_level = low_level
        self.table = (semantic or low_level).store.table

    def _space(self, space: CodeSpace) -> SpaceIndex:
        index = self.semantic if space == CodeSpace.SEMANTIC else self.low_level
        if index is None:
            raise MissingSpaceError(f"no index built for code space {space.value}")
        return index

    def two_stage_search(self, query: SimilarityQuery) -> KeyframeRanking:
        """Coarse shortlist per active space, then exact 256-bit blending.

        Whenever the corpus is no larger than the shortlist size the result
        is exact with respect to the blended 256-bit ranking.
        """
        active: list[tuple[float, SpaceIndex, QueryCodes]] = []
        if query.alpha > 0.0:
            active.append((query.alpha, self._space(CodeSpace.SEMANTIC), query.semantic))
        if query.alpha < 1.0:
            active.append((1.0 - query.alpha, self._space(CodeSpace.LOW_LEVEL), query.low_level))

        shortlists = []
        for _, index, codes in active:
            ords, _ = index.tree.query(codes.code64, k=query.shortlist_size)
            shortlists.append(ords)
        candidates = shortlists[0] if len(shortlists) == 1 else np.union1d(*shortlists)

        blended = np.zeros(candidates.shape[0], dtype=np.float64)
        for weight, index, codes in active:
            d256 = hamming256_for(index.store, codes.code256, candidates)
            blended += weight * (d256 / 256.0)
        perm = np.lexsort((candidates, blended))
        return KeyframeRanking(self.table, candidates[perm], blended[perm])

    def search_shots(self, query: SimilarityQuery) -> RankedResult:
        """Full pipeline: two-stage keyframe ranking mapped to ranked shots."""
        ranking = self.two_stage_search(query)
        scores = keyframes_to_shots(ranking, query.k_shots)
        return RankedResult(
            entries=tuple((s.shot, s.score) for s in scores),
            query_kind=QueryKind.SIMILARITY,
        )

    def _stored_codes(self, index: SpaceIndex, ordinal: int) -> QueryCodes:
        return QueryCodes(index.store.code64(ordinal), index.store.code256(ordinal))

    def query_by_shot(self, video_id: str, shot_index: int, position: int,
                      alpha: float = 1.0, k: int = 100,
                      shortlist_size: int = DEFAULT_SHORTLIST) -> RankedResult:
        """Similarity search seeded by an indexed keyframe's stored codes."""
        ordinal = self.table.keyframe_ordinal(video_id, shot_index, position)
        semantic = low_level = None
        if alpha > 0.0:
            semantic = self._stored_codes(self._space(CodeSpace.SEMANTIC), ordinal)
        if alpha < 1.0:
            low_level = self._stored_codes(self._space(CodeSpace.LOW_LEVEL), ordinal)
        query = SimilarityQuery(
            semantic=semantic, low_level=low_level, alpha=alpha,
            k_shots=k, shortlist_size=shortlist_size,
        )
        return self.search_shots(query)

    def query_by_vector(self, hasher: HyperplaneHasher, vector,
                        alpha: float = 1.0, k: int = 100,
                        shortlist_size: int = DEFAULT_SHORTLIST) -> RankedResult:
        """Similarity search for an external image, given its feature vector.

        The same encoder produces codes for both spaces here; callers with
        genuinely separate low-level codes should pass a SimilarityQuery to
        search_shots directly.
        """
        v = as_feature_vector(vector, dim=hasher.dim)
        code64, code256 = hasher.encode(v)
        codes = QueryCodes(code64, code256)
        query = SimilarityQuery(
            semantic=codes if alpha > 0.0 else None,
            low_level=codes if alpha < 1.0 else None,
            alpha=alpha, k_shots=k, shortlist_size=shortlist_size,
        )
        return self.search_shots(query)
