"""Latency benchmark for the two-stage similarity search.

Builds (or receives) an index over N synthetic keyframe code records and
measures end-to-end query latency - coarse tree search, 256-bit refinement,
blending, and shot aggregation - reporting p50/p95/p99 against the 2-second
bound the engine is expected to hold on a 7-million-image corpus.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .model import KEYFRAMES_PER_SHOT, CodeSpace, QueryKind, BinaryCode
from .search import QueryCodes, SimilarityQuery, SimilaritySearcher, SpaceIndex
from .store import CodeStore, KeyframeTable
from .vptree import VantagePointTree

LATENCY_BOUND_SECONDS = 2.0


def synthetic_table(n_keyframes: int, shots_per_video: int = 1000,
                    frames_per_shot: int = 120) -> KeyframeTable:
    """Purely arithmetic shot/keyframe tables, no per-row Python objects."""
    n_shots = -(-n_keyframes // KEYFRAMES_PER_SHOT)
    n_videos = -(-n_shots // shots_per_video)
    videos = [f"synth{v:05d}" for v in range(n_videos)]
    shot_ids = np.arange(n_shots, dtype=np.int64)
    shot_video = (shot_ids // shots_per_video).astype(np.int32)
    shot_index = shot_ids % shots_per_video
    shot_start = shot_index * frames_per_shot
    shot_end = shot_start + frames_per_shot - 1
    span = frames_per_shot - 1
    offsets = (span * np.arange(KEYFRAMES_PER_SHOT, dtype=np.int64)) // 4
    kf_frame = (shot_start[:, None] + offsets[None, :]).reshape(-1)
    return KeyframeTable(videos, shot_video, shot_index, shot_start, shot_end, kf_frame)


def synthetic_store(n_keyframes: int, seed: int = 0,
                    space: CodeSpace = CodeSpace.SEMANTIC,
                    table: KeyframeTable | None = None) -> CodeStore:
    """Uniform random codes over a synthetic table; n rounds up to a
    multiple of five so every shot owns exactly five keyframes."""
    if table is None:
        table = synthetic_table(n_keyframes)
    n = table.n_keyframes
    rng = np.random.default_rng(seed)
    words64 = rng.integers(0, 2**64, size=n, dtype=np.uint64)
    words256 = rng.integers(0, 2**64, size=(n, 4), dtype=np.uint64)
    return CodeStore(table, space, words64, words256)


@dataclass
class BenchReport:
    n_codes: int
    n_queries: int
    shortlist_size: int
    k_shots: int
    alpha: float
    build_seconds: float
    latencies: list[float] = field(repr=False, default_factory=list)
    bound_seconds: float = LATENCY_BOUND_SECONDS

    def percentile(self, q: float) -> float:
        return float(np.percentile(self.latencies, q))

    @property
    def p50(self) -> float:
        return self.percentile(50)

    @property
    def p95(self) -> float:
        return self.percentile(95)

    @property
    def p99(self) -> float:
        return self.percentile(99)

    @property
    def max(self) -> float:
        return max(self.latencies)

    @property
    def within_bound(self) -> bool:
        return self.max < self.bound_seconds

    def summary(self) -> str:
        lines = [
            f"corpus:        {self.n_codes:,} keyframe codes "
            f"({self.n_codes // KEYFRAMES_PER_SHOT:,} shots)",
            f"queries:       {self.n_queries} two-stage similarity queries "
            f"(alpha={self.alpha}, shortlist={self.shortlist_size:,}, k={self.k_shots})",
            f"build time:    {self.build_seconds:.1f} s",
            f"latency p50:   {self.p50 * 1000:.1f} ms",
            f"latency p95:   {self.p95 * 1000:.1f} ms",
            f"latency p99:   {self.p99 * 1000:.1f} ms",
            f"latency max:   {self.max * 1000:.1f} ms",
            f"bound:         {'PASS' if self.within_bound else 'FAIL'} "
            f"(every query < {self.bound_seconds:.1f} s)",
        ]
        return "\n".join(lines)

    def as_dict(self) -> dict:
        return {
            "n_codes": self.n_codes,
            "n_queries": self.n_queries,
            "shortlist_size": self.shortlist_size,
            "k_shots": self.k_shots,
            "alpha": self.alpha,
            "build_seconds": self.build_seconds,
            "p50_seconds": self.p50,
            "p95_seconds": self.p95,
            "p99_seconds": self.p99,
            "max_seconds": self.max,
            "bound_seconds": self.bound_seconds,
            "within_bound": self.within_bound,
            "latencies_seconds": list(self.latencies),
        }


def run_benchmark(
    store: CodeStore | None = None,
    n_codes: int = 7_000_000,
    n_queries: int = 100,
    shortlist_size: int = 10_000,
    k_shots: int = 100,
    alpha: float = 1.0,
    seed: int = 0,
    leaf_size: int = 32,
    tree: VantagePointTree | None = None,
    progress=None,
) -> BenchReport:
    """Time end-to-end similarity queries over a synthetic (or given) corpus.

    One untimed warm-up query runs first so JIT compilation does not land in
    the measured latencies.
    """
    if store is None:
        if progress:
            progress(f"synthesizing {n_codes:,} code records")
        store = synthetic_store(n_codes, seed=seed)
    build_start = time.perf_counter()
    if tree is None:
        if progress:
            progress(f"building vantage-point tree over {len(store):,} codes")
        tree = VantagePointTree(leaf_size=leaf_size, random_state=seed).fit(store)
    build_seconds = time.perf_counter() - build_start

    searcher = SimilaritySearcher(semantic=SpaceIndex(store=store, tree=tree))
    rng = np.random.default_rng(seed + 1)

    def random_query() -> SimilarityQuery:
        w64 = rng.integers(0, 2**64, dtype=np.uint64)
        w256 = rng.integers(0, 2**64, size=4, dtype=np.uint64)
        codes = QueryCodes(BinaryCode(64, w64.tobytes()), BinaryCode(256, w256.tobytes()))
        return SimilarityQuery(
            semantic=codes, alpha=alpha, k_shots=k_shots, shortlist_size=shortlist_size,
        )

    result = searcher.search_shots(random_query())  # warm-up, untimed
    assert result.query_kind is QueryKind.SIMILARITY

    if progress:
        progress(f"running {n_queries} timed queries")
    latencies = []
    for _ in range(n_queries):
        query = random_query()
        start = time.perf_counter()
        searcher.search_shots(query)
        latencies.append(time.perf_counter() - start)

    return BenchReport(
        n_codes=len(store),
        n_queries=n_queries,
        shortlist_size=shortlist_size,
        k_shots=k_shots,
        alpha=alpha,
        build_seconds=build_seconds,
        latencies=latencies,
    )
