"""Average precision and mean AP over ranked shot lists.

AP of a ranking prefix of length N with relevant set R:

    AP = (1 / |R intersect prefix_N|) * sum_{k=1..N} (hits_at_k / k) * [item_k relevant]

Note the normalizer is the number of relevant shots actually retrieved in
the prefix, not |R|; an empty intersection yields 0 by convention so mean
AP stays total.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import FormatError
from .model import RankedResult, shot_key


@dataclass(frozen=True)
class RelevanceJudgments:
    """Ground truth for one query: the set of relevant shots."""

    query_id: str
    relevant: frozenset

    def __post_init__(self):
        keys = frozenset(shot_key(s) for s in self.relevant)
        if not keys:
            raise ValueError(f"query {self.query_id!r} has an empty relevant set")
        object.__setattr__(self, "relevant", keys)


@dataclass(frozen=True)
class EvalReport:
    """Per-query AP values and their mean at one ranking cutoff."""

    cutoff: int
    per_query: Mapping[str, float]
    mean: float


def _ranking_keys(ranking) -> list:
    if isinstance(ranking, RankedResult):
        return [shot.key for shot, _ in ranking.entries]
    return [shot_key(item) for item in ranking]


def average_precision(ranking, judgments: RelevanceJudgments, n: int) -> float:
    """AP of the top-n prefix; rankings shorter than n evaluate as-is."""
    if n < 1:
        raise ValueError("cutoff must be >= 1")
    relevant = judgments.relevant
    prefix = _ranking_keys(ranking)[:n]
    hits = 0
    total = 0.0
    for k, key in enumerate(prefix, start=1):
        if key in relevant:
            hits += 1
            total += hits / k
    if hits == 0:
        return 0.0
    return total / hits


def mean_ap(values: Sequence[float]) -> float:
    """Arithmetic mean of per-query AP scores."""
    values = list(values)
    if not values:
        raise ValueError("mean AP over an empty query set is undefined")
    return sum(values) / len(values)


def evaluate_run(
    queries: Iterable[tuple[str, object, RelevanceJudgments]],
    cutoffs: Sequence[int] = (100, 200),
) -> list[EvalReport]:
    """Score every (query_id, ranking, judgments) triple at each cutoff."""
    queries = list(queries)
    reports = []
    for n in cutoffs:
        per_query = {
            qid: average_precision(ranking, judgments, n)
            for qid, ranking, judgments in queries
        }
        reports.append(EvalReport(cutoff=n, per_query=per_query,
                                  mean=mean_ap(list(per_query.values()))))
    return reports


def load_judgments(path) -> dict[str, RelevanceJudgments]:
    """Read `query_id <TAB> video_id <TAB> shot_index` lines."""
    grouped: dict[str, set] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(
                    f"expected 3 tab-separated fields, got {len(parts)}",
                    path=path, line=lineno,
                )
            qid, video_id, idx = parts
            try:
                key = (video_id, int(idx))
            except ValueError:
                raise FormatError(
                    f"shot_index {idx!r} is not an integer", path=path, line=lineno
                ) from None
            grouped.setdefault(qid, set()).add(key)
    return {qid: RelevanceJudgments(qid, frozenset(keys)) for qid, keys in grouped.items()}


def load_run(path) -> dict[str, list[tuple[tuple[str, int], float]]]:
    """Read a ranked run: `query_id <TAB> video_id <TAB> shot_index <TAB> score`
    lines, in rank order per query. Scores must be non-increasing and shots
    unique within a query."""
    runs: dict[str, list[tuple[tuple[str, int], float]]] = {}
    seen: dict[str, set] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise FormatError(
                    f"expected 4 tab-separated fields, got {len(parts)}",
                    path=path, line=lineno,
                )
            qid, video_id, idx, score = parts
            try:
                key = (video_id, int(idx))
                value = float(score)
            except ValueError:
                raise FormatError(
                    f"malformed shot_index/score {idx!r}/{score!r}",
                    path=path, line=lineno,
                ) from None
            if value != value:
                raise FormatError("score is NaN", path=path, line=lineno)
            entries = runs.setdefault(qid, [])
            keys = seen.setdefault(qid, set())
            if key in keys:
                raise FormatError(
                    f"shot {video_id}#{idx} appears twice for query {qid!r}",
                    path=path, line=lineno,
                )
            if entries and value > entries[-1][1]:
                raise FormatError(
                    f"scores increase at rank {len(entries) + 1} for query {qid!r}",
                    path=path, line=lineno,
                )
            keys.add(key)
            entries.append((key, value))
    return runs


def format_report(reports: Sequence[EvalReport]) -> str:
    """Human-readable table, one block per cutoff."""
    lines = []
    for report in reports:
        lines.append(f"cutoff N={report.cutoff}")
        lines.append(f"{'query':<24} {'AP':>8}")
        for qid in sorted(report.per_query):
            lines.append(f"{qid:<24} {report.per_query[qid]:>8.4f}")
        lines.append(f"{'mAP':<24} {report.mean:>8.4f}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def report_records(reports: Sequence[EvalReport]) -> str:
    """Machine-readable line-delimited records: metric, cutoff, query, value."""
    out = []
    for report in reports:
        for qid in sorted(report.per_query):
            out.append(f"AP\t{report.cutoff}\t{qid}\t{report.per_query[qid]:.10f}")
        out.append(f"mAP\t{report.cutoff}\t-\t{report.mean:.10f}")
    return "\n".join(out) + "\n"
