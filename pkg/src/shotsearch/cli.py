"""Operations CLI: ingest, build, serve, query, eval, bench.

Every failure class exits non-zero with a structured `error: <Class>: message`
line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ShotSearchError


def _add_bundle(parser):
    parser.add_argument("--bundle", required=True, help="bundle directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shotsearch",
        description="Retrieval engine for shot-segmented video archives",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate archive input files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--codes-semantic")
    p.add_argument("--codes-low-level")
    p.add_argument("--annotations")
    p.add_argument("--text")

    p = sub.add_parser("build", help="build a bundle directory from input files")
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--codes-semantic")
    p.add_argument("--codes-low-level")
    p.add_argument("--annotations")
    p.add_argument("--text")
    p.add_argument("--tree-seed", type=int, default=0)
    p.add_argument("--leaf-size", type=int, default=32)
    p.add_argument("--encoder-seed", type=int, default=0)
    p.add_argument("--encoder-dim", type=int, default=128)
    p.add_argument("--similarity-floor", type=float, default=0.6)

    p = sub.add_parser("serve", help="serve a bundle over HTTP")
    _add_bundle(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--thumbs", help="static keyframe thumbnail directory")

    p = sub.add_parser("query", help="run one query against a bundle")
    qsub = p.add_subparsers(dest="family", required=True)

    q = qsub.add_parser("similar")
    _add_bundle(q)
    q.add_argument("--shot", help="shot reference video_id#shot_index")
    q.add_argument("--position", type=int, default=2)
    q.add_argument("--vector", help="comma-separated feature vector")
    q.add_argument("--vector-file", help="JSON array or whitespace-separated floats")
    q.add_argument("--alpha", type=float, default=1.0)
    q.add_argument("--k", type=int, default=100)
    q.add_argument("--offset", type=int, default=0)
    q.add_argument("--shortlist", type=int, default=10_000)

    for family in ("concept", "person"):
        q = qsub.add_parser(family)
        _add_bundle(q)
        q.add_argument("--label", required=True)
        q.add_argument("--k", type=int, default=100)
        q.add_argument("--offset", type=int, default=0)

    q = qsub.add_parser("text")
    _add_bundle(q)
    q.add_argument("--q", required=True, dest="term")
    q.add_argument("--k", type=int, default=100)
    q.add_argument("--offset", type=int, default=0)

    p = sub.add_parser("eval", help="score a run file against judgments")
    p.add_argument("--run", required=True)
    p.add_argument("--judgments", required=True)
    p.add_argument("--n", type=int, action="append", dest="cutoffs",
                   help="ranking cutoff; repeatable (default: 100 and 200)")
    p.add_argument("--records", help="also write machine-readable records here")

    p = sub.add_parser("bench", help="measure similarity-query latency")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--synthetic", type=int, metavar="N",
                       help="benchmark over N synthetic keyframe code records")
    group.add_argument("--bundle", help="benchmark over a built bundle")
    p.add_argument("--queries", type=int, default=100)
    p.add_argument("--shortlist", type=int, default=10_000)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--leaf-size", type=int, default=32)
    p.add_argument("--json", dest="json_out", help="write the full report as JSON")

    return parser


def cmd_ingest(args) -> int:
    from .ingest import load_annotations, load_code_store, load_manifest, load_text
    from .model import CodeSpace
    from .store import KeyframeTable

    shots, keyframes = load_manifest(args.manifest)
    print(f"manifest: {len(shots)} shots, {len(keyframes)} keyframes")
    table = KeyframeTable.from_tables(shots, keyframes)
    for space, path in (
        (CodeSpace.SEMANTIC, args.codes_semantic),
        (CodeSpace.LOW_LEVEL, args.codes_low_level),
    ):
        if path:
            store = load_code_store(path, space, table)
            print(f"codes [{space.value}]: {len(store)} records")
    if args.annotations:
        entries = load_annotations(args.annotations, shots)
        print(f"annotations: {len(entries)} entries")
    if args.text:
        occurrences = load_text(args.text, shots)
        print(f"text: {len(occurrences)} word occurrences")
    print("ok")
    return 0


def cmd_build(args) -> int:
    from .bundle import build_bundle

    bundle = build_bundle(
        out_dir=args.out,
        manifest_path=args.manifest,
        codes_semantic=args.codes_semantic,
        codes_low_level=args.codes_low_level,
        annotations_path=args.annotations,
        text_path=args.text,
        tree_seed=args.tree_seed,
        leaf_size=args.leaf_size,
        encoder_seed=args.encoder_seed,
        encoder_dim=args.encoder_dim,
        similarity_floor=args.similarity_floor,
    )
    counts = bundle.metadata["counts"]
    print(f"built bundle at {args.out}")
    for key in ("videos", "shots", "keyframes", "annotations", "text_occurrences"):
        print(f"  {key}: {counts[key]}")
    print(f"  spaces: {', '.join(counts['spaces'])}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .bundle import load_bundle
    from .service import create_app

    bundle = load_bundle(args.bundle, verify=True)
    app = create_app(bundle, thumbs_dir=args.thumbs)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_query(args) -> int:
    from .bundle import load_bundle
    from .model import AnnotationKind, shot_key

    bundle = load_bundle(args.bundle, verify=True)
    fetch = args.k + args.offset
    if args.family == "similar":
        if (args.shot is None) == (args.vector is None and args.vector_file is None):
            raise ShotSearchError("provide exactly one of --shot or --vector/--vector-file")
        if args.shot is not None:
            video_id, shot_index = shot_key(args.shot)
            result = bundle.searcher.query_by_shot(
                video_id, shot_index, position=args.position, alpha=args.alpha,
                k=fetch, shortlist_size=args.shortlist,
            )
        else:
            if args.vector is not None:
                vector = [float(x) for x in args.vector.split(",") if x.strip()]
            else:
                text = Path(args.vector_file).read_text(encoding="utf-8")
                stripped = text.lstrip()
                if stripped.startswith("["):
                    vector = json.loads(text)
                else:
                    vector = [float(x) for x in text.split()]
            result = bundle.searcher.query_by_vector(
                bundle.hasher, vector, alpha=args.alpha,
                k=fetch, shortlist_size=args.shortlist,
            )
    elif args.family in ("concept", "person"):
        result = bundle.postings.concept_search(
            args.label, AnnotationKind(args.family), k=fetch
        )
    else:
        result = bundle.text.text_search(args.term, k=fetch)
    trimmed = result.entries[args.offset:args.offset + args.k]
    for i, (shot, score) in enumerate(trimmed):
        print(f"{args.offset + i + 1}\t{shot.shot_id}\t{score:.6f}")
    return 0


def cmd_eval(args) -> int:
    from .evaluation import (
        evaluate_run,
        format_report,
        load_judgments,
        load_run,
        report_records,
    )

    runs = load_run(args.run)
    judgments = load_judgments(args.judgments)
    scored = []
    for qid, entries in runs.items():
        if qid not in judgments:
            print(f"warning: query {qid!r} has no judgments, skipped", file=sys.stderr)
            continue
        scored.append((qid, [key for key, _ in entries], judgments[qid]))
    if not scored:
        raise ShotSearchError("no run query has judgments; nothing to score")
    cutoffs = tuple(args.cutoffs) if args.cutoffs else (100, 200)
    reports = evaluate_run(scored, cutoffs=cutoffs)
    print(format_report(reports), end="")
    if args.records:
        Path(args.records).write_text(report_records(reports), encoding="utf-8")
        print(f"records written to {args.records}", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    from .bench import run_benchmark

    def progress(message):
        print(message, file=sys.stderr)

    if args.bundle:
        from .bundle import load_bundle
        from .model import CodeSpace

        bundle = load_bundle(args.bundle, verify=True)
        index = bundle.indexes[CodeSpace.SEMANTIC]
        report = run_benchmark(
            store=index.store, tree=index.tree, n_queries=args.queries,
            shortlist_size=args.shortlist, k_shots=args.k, alpha=args.alpha,
            seed=args.seed, progress=progress,
        )
    else:
        report = run_benchmark(
            n_codes=args.synthetic, n_queries=args.queries,
            shortlist_size=args.shortlist, k_shots=args.k, alpha=args.alpha,
            seed=args.seed, leaf_size=args.leaf_size, progress=progress,
        )
    print(report.summary())
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps(report.as_dict(), indent=2), encoding="utf-8"
        )
    return 0 if report.within_bound else 1


_COMMANDS = {
    "ingest": cmd_ingest,
    "build": cmd_build,
    "serve": cmd_serve,
    "query": cmd_query,
    "eval": cmd_eval,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ShotSearchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
