"""Deterministic random-hyperplane encoder mapping feature vectors to 64- and
256-bit codes.

This is the reproducible stand-in for a learned semantic hash: nearby
vectors receive nearby codes (the expected normalized Hamming distance of
two unit vectors approaches angle/pi), and the whole construction is a pure
function of (seed, dim). Planes are drawn from numpy's PCG64 stream: first
the 64 x dim set, then a separate 256 x dim set, so the short code is not a
truncation of the long one.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array

from .model import BinaryCode

DEFAULT_DIM = 128


def as_feature_vector(values, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 vector, optionally checking dimension."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("feature vector contains non-finite values")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"feature vector has dimension {v.shape[0]}, expected {dim}")
    return v


def _pack_bits(signs: np.ndarray) -> np.ndarray:
    """(n, bits) boolean -> (n, bits/64) uint64, bit b at byte b//8, bit b%8."""
    packed = np.packbits(signs, axis=1, bitorder="little")
    return packed.view("<u8")


class HyperplaneHasher(BaseEstimator):
    """Encode feature vectors into both binary code widths.

    Bit b of a code is 1 iff dot(plane_b, v) >= 0; the tie at exactly zero
    encodes 1 so that results are reproducible bit-for-bit.
    """

    def __init__(self, dim=DEFAULT_DIM, seed=0):
        self.dim = dim
        self.seed = seed

    def fit(self, X=None, y=None):
        """Materialize the plane matrices (a pure function of the params)."""
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        rng = np.random.Generator(np.random.PCG64(self.seed))
        self.planes64_ = rng.standard_normal((64, self.dim))
        self.planes256_ = rng.standard_normal((256, self.dim))
        return self

    def _ensure_planes(self):
        if not hasattr(self, "planes64_"):
            self.fit()

    def transform(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Batch encode (n, dim) vectors; returns ((n,) uint64, (n, 4) uint64)."""
        self._ensure_planes()
        X = check_array(X, dtype=np.float64, ensure_2d=True)
        if X.shape[1] != self.dim:
            raise ValueError(f"vectors have dimension {X.shape[1]}, expected {self.dim}")
        if not np.all(np.isfinite(X)):
            raise ValueError("feature vectors contain non-finite values")
        signs64 = X @ self.planes64_.T >= 0.0
        signs256 = X @ self.planes256_.T >= 0.0
        return _pack_bits(signs64).reshape(-1), _pack_bits(signs256)

    def encode(self, vector) -> tuple[BinaryCode, BinaryCode]:
        """Encode one feature vector to its (64-bit, 256-bit) code pair."""
        v = as_feature_vector(vector, dim=self.dim)
        words64, words256 = self.transform(v.reshape(1, -1))
        return (
            BinaryCode(64, words64.tobytes()),
            BinaryCode(256, words256.tobytes()),
        )
