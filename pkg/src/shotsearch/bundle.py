"""The on-disk archive bundle: shot tables, per-space code stores and trees,
posting lists, vocabulary, and build metadata.

A bundle directory contains copies of the ingested files, one SHGT tree
snapshot per code space, and metadata.json recording seeds, counts,
timestamps, and sha256 checksums. Loading verifies every checksum so all
sub-indexes provably come from the same manifest snapshot; a mismatch
raises ChecksumError.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ChecksumError, FormatError
from .hashing import DEFAULT_DIM, HyperplaneHasher
from .ingest import (
    load_annotations,
    load_code_store,
    load_manifest,
    load_text,
)
from .lexical import DEFAULT_SIMILARITY_FLOOR, PostingIndex, TextIndex
from .model import CodeSpace
from .search import SimilaritySearcher, SpaceIndex
from .store import KeyframeTable
from .vptree import VantagePointTree

METADATA_VERSION = 1

_FILES = {
    CodeSpace.SEMANTIC: ("codes_semantic.shgc", "tree_semantic.shgt"),
    CodeSpace.LOW_LEVEL: ("codes_low_level.shgc", "tree_low_level.shgt"),
}


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class ArchiveBundle:
    """Everything the service needs, loaded and cross-checked."""

    root: Path
    table: KeyframeTable
    indexes: dict
    postings: PostingIndex
    text: TextIndex
    hasher: HyperplaneHasher
    metadata: dict
    shots: list = field(default_factory=list)

    @property
    def searcher(self) -> SimilaritySearcher:
        return SimilaritySearcher(
            semantic=self.indexes.get(CodeSpace.SEMANTIC),
            low_level=self.indexes.get(CodeSpace.LOW_LEVEL),
        )

    def verify(self):
        """Re-hash the bundle files against metadata; raises ChecksumError."""
        for name, expected in self.metadata["checksums"].items():
            path = self.root / name
            if not path.exists():
                raise ChecksumError(f"bundle file {name} is missing")
            actual = _sha256(path)
            if actual != expected:
                raise ChecksumError(
                    f"bundle file {name} changed since build "
                    f"({actual[:12]} != {expected[:12]})"
                )


def build_bundle(
    out_dir,
    manifest_path,
    codes_semantic=None,
    codes_low_level=None,
    annotations_path=None,
    text_path=None,
    tree_seed: int = 0,
    leaf_size: int = 32,
    encoder_seed: int = 0,
    encoder_dim: int = DEFAULT_DIM,
    similarity_floor: float = DEFAULT_SIMILARITY_FLOOR,
) -> ArchiveBundle:
    """Ingest, index, snapshot, and write metadata; returns the live bundle."""
    import shutil

    if codes_semantic is None and codes_low_level is None:
        raise ValueError("at least one code file is required")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    shots, keyframes = load_manifest(manifest_path)
    table = KeyframeTable.from_tables(shots, keyframes)

    shutil.copyfile(manifest_path, out / "manifest.tsv")
    files = {"manifest.tsv": _sha256(out / "manifest.tsv")}

    spaces = {}
    seeds = {}
    for space, source in (
        (CodeSpace.SEMANTIC, codes_semantic),
        (CodeSpace.LOW_LEVEL, codes_low_level),
    ):
        if source is None:
            continue
        codes_name, tree_name = _FILES[space]
        store = load_code_store(source, space, table)
        shutil.copyfile(source, out / codes_name)
        tree = VantagePointTree(leaf_size=leaf_size, random_state=tree_seed).fit(store)
        tree.save(out / tree_name, store=store)
        spaces[space] = SpaceIndex(store=store, tree=tree)
        seeds[f"tree_{space.value}"] = tree_seed
        files[codes_name] = _sha256(out / codes_name)
        files[tree_name] = _sha256(out / tree_name)

    entries = []
    if annotations_path is not None:
        entries = load_annotations(annotations_path, shots)
        shutil.copyfile(annotations_path, out / "annotations.tsv")
        files["annotations.tsv"] = _sha256(out / "annotations.tsv")
    occurrences = []
    if text_path is not None:
        occurrences = load_text(text_path, shots)
        shutil.copyfile(text_path, out / "text.tsv")
        files["text.tsv"] = _sha256(out / "text.tsv")

    metadata = {
        "version": METADATA_VERSION,
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "counts": {
            "videos": len(table.videos),
            "shots": table.n_shots,
            "keyframes": table.n_keyframes,
            "annotations": len(entries),
            "text_occurrences": len(occurrences),
            "spaces": sorted(s.value for s in spaces),
        },
        "seeds": seeds,
        "encoder": {"seed": encoder_seed, "dim": encoder_dim},
        "similarity_floor": similarity_floor,
        "table_checksum": table.checksum(),
        "checksums": files,
    }
    (out / "metadata.json").write_text(json.dumps(metadata, indent=2), encoding="utf-8")

    return ArchiveBundle(
        root=out,
        table=table,
        indexes=spaces,
        postings=PostingIndex(entries),
        text=TextIndex(occurrences, similarity_floor=similarity_floor),
        hasher=HyperplaneHasher(dim=encoder_dim, seed=encoder_seed),
        metadata=metadata,
        shots=shots,
    )


def load_bundle(bundle_dir, verify: bool = True) -> ArchiveBundle:
    """Load a bundle directory; with verify, every checksum must match."""
    root = Path(bundle_dir)
    meta_path = root / "metadata.json"
    if not meta_path.exists():
        raise FormatError("not a bundle directory: metadata.json missing", path=root)
    try:
        metadata = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"metadata.json is not valid JSON: {exc}", path=meta_path) from None
    if metadata.get("version") != METADATA_VERSION:
        raise FormatError(
            f"unsupported bundle version {metadata.get('version')}", path=meta_path
        )

    if verify:
        for name, expected in metadata["checksums"].items():
            path = root / name
            if not path.exists():
                raise ChecksumError(f"bundle file {name} is missing")
            actual = _sha256(path)
            if actual != expected:
                raise ChecksumError(
                    f"bundle file {name} changed since build "
                    f"({actual[:12]} != {expected[:12]})"
                )

    shots, keyframes = load_manifest(root / "manifest.tsv")
    table = KeyframeTable.from_tables(shots, keyframes)
    if table.checksum() != metadata["table_checksum"]:
        raise ChecksumError("manifest no longer matches the indexed shot table")

    spaces = {}
    for space in (CodeSpace.SEMANTIC, CodeSpace.LOW_LEVEL):
        codes_name, tree_name = _FILES[space]
        if not (root / codes_name).exists():
            continue
        store = load_code_store(root / codes_name, space, table)
        tree = VantagePointTree.load(root / tree_name, store)
        spaces[space] = SpaceIndex(store=store, tree=tree)
    if not spaces:
        raise FormatError("bundle holds no code spaces", path=root)

    entries = []
    if (root / "annotations.tsv").exists():
        entries = load_annotations(root / "annotations.tsv", shots)
    occurrences = []
    if (root / "text.tsv").exists():
        occurrences = load_text(root / "text.tsv", shots)

    encoder = metadata.get("encoder", {})
    return ArchiveBundle(
        root=root,
        table=table,
        indexes=spaces,
        postings=PostingIndex(entries),
        text=TextIndex(
            occurrences,
            similarity_floor=metadata.get("similarity_floor", DEFAULT_SIMILARITY_FLOOR),
        ),
        hasher=HyperplaneHasher(
            dim=encoder.get("dim", DEFAULT_DIM), seed=encoder.get("seed", 0)
        ),
        metadata=metadata,
        shots=shots,
    )
