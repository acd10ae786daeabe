"""Exact Hamming-distance k-nearest-neighbor search over 64-bit codes via a
vantage-point tree, plus the 256-bit refinement pass used on shortlists.

The tree follows the classic construction: a seeded, uniformly chosen
vantage point per node, the median distance as the partition radius, and
linear scans inside leaf buckets. Pruning uses the triangle inequality and
never drops a true neighbor; the tree accelerates, it does not approximate.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from .errors import ChecksumError, CodeWidthError, FormatError
from .model import BinaryCode
from .store import CodeStore

_SNAPSHOT_MAGIC = b"SHGT"
_SNAPSHOT_VERSION = 1


def hamming(a: BinaryCode, b: BinaryCode) -> int:
    """Number of differing bit positions between two equal-width codes."""
    if a.width != b.width:
        raise CodeWidthError(f"cannot compare {a.width}-bit and {b.width}-bit codes")
    return (a.to_int() ^ b.to_int()).bit_count()


def _as_words64(codes) -> np.ndarray:
    if isinstance(codes, CodeStore):
        return codes.words64
    arr = np.ascontiguousarray(codes, dtype=np.uint64).reshape(-1)
    return arr


def _query_word(query) -> np.uint64:
    if isinstance(query, BinaryCode):
        if query.width != 64:
            raise CodeWidthError(f"tree queries need 64-bit codes, got {query.width}")
        return np.frombuffer(query.bits, dtype="<u8")[0]
    return np.uint64(query)


def _query_words256(query) -> np.ndarray:
    if isinstance(query, BinaryCode):
        if query.width != 256:
            raise CodeWidthError(f"refinement needs 256-bit codes, got {query.width}")
        return np.frombuffer(query.bits, dtype="<u8")
    arr = np.ascontiguousarray(query, dtype=np.uint64).reshape(-1)
    if arr.shape[0] != 4:
        raise CodeWidthError("a 256-bit code is four 64-bit words")
    return arr


class VantagePointTree(BaseEstimator):
    """Exact kNN index over 64-bit binary codes.

    Parameters
    ----------
    leaf_size : bucket size below which nodes become linear-scan leaves.
    random_state : integer seed for the vantage-point choice; the same seed
        over the same codes rebuilds a bit-identical tree.
    """

    def __init__(self, leaf_size=32, random_state=0):
        self.leaf_size = leaf_size
        self.random_state = random_state

    def fit(self, codes, y=None):
        """Build the tree over a CodeStore or a (n,) uint64 array."""
        words = _as_words64(codes)
        n = words.shape[0]
        if n == 0:
            raise ValueError("cannot index an empty code store")
        if self.leaf_size < 1:
            raise ValueError("leaf_size must be >= 1")
        cap = max(64, 8 * (n // max(1, int(self.leaf_size))) + 8)
        dist = np.empty(n, dtype=np.int32)
        while True:
            order = np.arange(n, dtype=np.int32)
            vantage = np.empty(cap, dtype=np.int32)
            radius = np.empty(cap, dtype=np.int32)
            left = np.empty(cap, dtype=np.int32)
            right = np.empty(cap, dtype=np.int32)
            seg_lo = np.empty(cap, dtype=np.int32)
            seg_hi = np.empty(cap, dtype=np.int32)
            st = [np.empty(cap + 2, dtype=np.int32) for _ in range(5)]
            node_count, max_depth = _kernels.build_tree(
                words, order, dist, np.int64(self.leaf_size),
                np.uint64(np.int64(self.random_state)),
                vantage, radius, left, right, seg_lo, seg_hi,
                st[0], st[1], st[2], st[3], st[4],
            )
            if node_count >= 0:
                break
            cap = min(cap * 2, 2 * n + 2)
        self.codes_ = words
        self.order_ = order
        self.vantage_ = vantage[:node_count].copy()
        self.radius_ = radius[:node_count].copy()
        self.left_ = left[:node_count].copy()
        self.right_ = right[:node_count].copy()
        self.seg_lo_ = seg_lo[:node_count].copy()
        self.seg_hi_ = seg_hi[:node_count].copy()
        self.node_count_ = int(node_count)
        self.max_depth_ = int(max_depth)
        self.n_codes_ = n
        return self

    def _query_one(self, word, k, prune=True):
        k = min(int(k), self.n_codes_)
        hd = np.empty(k, dtype=np.int32)
        ho = np.empty(k, dtype=np.int32)
        stack = np.empty(self.max_depth_ + 2, dtype=np.int32)
        found, visited, scanned = _kernels.knn64(
            self.codes_, self.order_, self.vantage_, self.radius_,
            self.left_, self.right_, self.seg_lo_, self.seg_hi_,
            np.uint64(word), k, stack, hd, ho, prune,
        )
        return hd[:found], ho[:found], int(visited), int(scanned)

    def query(self, query, k, prune=True):
        """k nearest ordinals for one query code.

        Returns (ordinals, distances) sorted by ascending distance, ties by
        ascending ordinal. k larger than the corpus returns the full corpus.
        """
        check_is_fitted(self, "node_count_")
        if k < 1:
            raise ValueError("k must be >= 1")
        hd, ho, _, _ = self._query_one(_query_word(query), k, prune)
        return ho.astype(np.int64), hd.astype(np.int64)

    def query_with_stats(self, query, k, prune=True):
        """Like query() but also returns (nodes_visited, codes_scanned)."""
        check_is_fitted(self, "node_count_")
        hd, ho, visited, scanned = self._query_one(_query_word(query), k, prune)
        return ho.astype(np.int64), hd.astype(np.int64), visited, scanned

    def kneighbors(self, queries, n_neighbors=1, return_distance=True):
        """sklearn-style batch interface over uint64 query codes.

        Unlike sklearn's NearestNeighbors this clamps n_neighbors to the
        corpus size instead of raising.
        """
        check_is_fitted(self, "node_count_")
        if n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        qs = np.atleast_1d(np.asarray(queries, dtype=np.uint64))
        k = min(int(n_neighbors), self.n_codes_)
        dist = np.empty((qs.shape[0], k), dtype=np.int64)
        ind = np.empty((qs.shape[0], k), dtype=np.int64)
        for i, word in enumerate(qs):
            hd, ho, _, _ = self._query_one(word, k)
            dist[i] = hd
            ind[i] = ho
        if return_distance:
            return dist, ind
        return ind

    def save(self, path, store: CodeStore | None = None):
        """Write the SHGT snapshot; reloading yields bit-identical queries."""
        check_is_fitted(self, "node_count_")
        checksum = (
            store.checksum64()
            if store is not None
            else _codes_checksum64(self.codes_)
        )
        with open(path, "wb") as fh:
            fh.write(_SNAPSHOT_MAGIC)
            fh.write(struct.pack(
                "<HqIQQIQ",
                _SNAPSHOT_VERSION,
                int(self.random_state),
                int(self.leaf_size),
                self.n_codes_,
                self.node_count_,
                self.max_depth_,
                checksum,
            ))
            for arr in (self.order_, self.vantage_, self.radius_, self.left_,
                        self.right_, self.seg_lo_, self.seg_hi_):
                fh.write(np.ascontiguousarray(arr, dtype="<i4").tobytes())

    @classmethod
    def load(cls, path, codes) -> "VantagePointTree":
        """Load a snapshot over the codes it was built from."""
        words = _as_words64(codes)
        with open(path, "rb") as fh:
            blob = fh.read()
        if blob[:4] != _SNAPSHOT_MAGIC:
            raise FormatError(f"bad magic {blob[:4]!r}, expected {_SNAPSHOT_MAGIC!r}", path=path)
        header = struct.Struct("<HqIQQIQ")
        if len(blob) < 4 + header.size:
            raise FormatError("truncated snapshot header", path=path)
        version, seed, leaf_size, n_codes, node_count, max_depth, checksum = (
            header.unpack_from(blob, 4)
        )
        if version != _SNAPSHOT_VERSION:
            raise FormatError(f"unsupported snapshot version {version}", path=path)
        if n_codes != words.shape[0]:
            raise ChecksumError(
                f"snapshot indexes {n_codes} codes but store holds {words.shape[0]}"
            )
        expected = (
            codes.checksum64() if isinstance(codes, CodeStore)
            else _codes_checksum64(words)
        )
        if checksum != expected:
            raise ChecksumError("snapshot was built over different codes")
        offset = 4 + header.size
        sizes = [n_codes] + [node_count] * 6
        total = offset + 4 * sum(sizes)
        if len(blob) != total:
            raise FormatError(
                f"snapshot length {len(blob)} != expected {total}", path=path
            )
        arrays = []
        for size in sizes:
            arr = np.frombuffer(blob, dtype="<i4", count=size, offset=offset)
            arrays.append(arr.astype(np.int32))
            offset += 4 * size
        tree = cls(leaf_size=int(leaf_size), random_state=int(seed))
        tree.codes_ = words
        tree.order_ = arrays[0]
        tree.vantage_ = arrays[1]
        tree.radius_ = arrays[2]
        tree.left_ = arrays[3]
        tree.right_ = arrays[4]
        tree.seg_lo_ = arrays[5]
        tree.seg_hi_ = arrays[6]
        tree.node_count_ = int(node_count)
        tree.max_depth_ = int(max_depth)
        tree.n_codes_ = int(n_codes)
        return tree


def _codes_checksum64(words: np.ndarray) -> int:
    digest = hashlib.sha256(np.ascontiguousarray(words, dtype="<u8").tobytes()).digest()
    return int.from_bytes(digest[:8], "little")


def refine256(store: CodeStore, query, shortlist) -> tuple[np.ndarray, np.ndarray]:
    """Exact 256-bit distances for shortlist members, sorted ascending with
    ties by ascending ordinal. Returns (ordinals, distances)."""
    ords = np.asarray(shortlist, dtype=np.int64).reshape(-1)
    if ords.size == 0:
        raise ValueError("shortlist must be non-empty")
    if ords.min() < 0 or ords.max() >= len(store):
        bad = ords[(ords < 0) | (ords >= len(store))][0]
        raise IndexError(f"ordinal {bad} outside store of {len(store)} codes")
    q = _query_words256(query)
    dists = np.bitwise_count(store.words256[ords] ^ q).sum(axis=1, dtype=np.int64)
    perm = np.lexsort((ords, dists))
    return ords[perm], dists[perm]


def hamming256_for(store: CodeStore, query, ords: np.ndarray) -> np.ndarray:
    """Unsorted exact 256-bit distances for the given ordinals."""
    q = _query_words256(query)
    return np.bitwise_count(store.words256[ords] ^ q).sum(axis=1, dtype=np.int64)
