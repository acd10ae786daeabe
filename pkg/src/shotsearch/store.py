"""Array-backed shot/keyframe tables and code stores.

The archive is held column-wise so that a 7M-keyframe corpus costs a few
hundred megabytes instead of millions of Python objects. Keyframe ordinals
are assigned as shot_ordinal * 5 + position, where shot ordinals follow
manifest order; the ordinal mapping is a bijection by construction.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Sequence

import numpy as np

from .errors import UnknownShotError, ValidationFailure
from .model import (
    KEYFRAMES_PER_SHOT,
    BinaryCode,
    CodeRecord,
    CodeSpace,
    Keyframe,
    ShotRef,
    validate_shot_table,
)


class KeyframeTable:
    """Columnar shot and keyframe tables with ordinal lookups."""

    def __init__(self, videos, shot_video, shot_index, shot_start, shot_end,
                 kf_frame):
        self.videos = list(videos)
        self.shot_video = np.asarray(shot_video, dtype=np.int32)
        self.shot_index = np.asarray(shot_index, dtype=np.int64)
        self.shot_start = np.asarray(shot_start, dtype=np.int64)
        self.shot_end = np.asarray(shot_end, dtype=np.int64)
        self.kf_frame = np.asarray(kf_frame, dtype=np.int64)
        if self.kf_frame.shape[0] != self.n_shots * KEYFRAMES_PER_SHOT:
            raise ValueError(
                f"{self.kf_frame.shape[0]} keyframes for {self.n_shots} shots; "
                f"expected {KEYFRAMES_PER_SHOT} per shot"
            )
        self._shot_lookup = None

    @property
    def n_shots(self) -> int:
        return self.shot_index.shape[0]

    @property
    def n_keyframes(self) -> int:
        return self.kf_frame.shape[0]

    @classmethod
    def from_tables(cls, shots: Sequence[ShotRef], keyframes: Iterable[Keyframe],
                    validate: bool = True) -> "KeyframeTable":
        """Build from object tables; shot ordinals follow the input order."""
        keyframes = list(keyframes)
        if validate:
            report = validate_shot_table(shots, keyframes)
            if not report.ok:
                raise ValidationFailure(report)
        video_ids: dict[str, int] = {}
        shot_video = np.empty(len(shots), dtype=np.int32)
        shot_index = np.empty(len(shots), dtype=np.int64)
        shot_start = np.empty(len(shots), dtype=np.int64)
        shot_end = np.empty(len(shots), dtype=np.int64)
        shot_ord = {}
        for i, shot in enumerate(shots):
            vid = video_ids.setdefault(shot.video_id, len(video_ids))
            shot_video[i] = vid
            shot_index[i] = shot.shot_index
            shot_start[i] = shot.start_frame
            shot_end[i] = shot.end_frame
            shot_ord[shot.key] = i
        kf_frame = np.empty(len(shots) * KEYFRAMES_PER_SHOT, dtype=np.int64)
        for kf in keyframes:
            kf_frame[shot_ord[kf.shot.key] * KEYFRAMES_PER_SHOT + kf.position] = kf.frame_number
        return cls(list(video_ids), shot_video, shot_index, shot_start, shot_end, kf_frame)

    def _lookup(self):
        if self._shot_lookup is None:
            self._shot_lookup = {
                (self.videos[self.shot_video[i]], int(self.shot_index[i])): i
                for i in range(self.n_shots)
            }
        return self._shot_lookup

    def shot_ordinal(self, video_id: str, shot_index: int) -> int:
        try:
            return self._lookup()[(video_id, int(shot_index))]
        except KeyError:
            raise UnknownShotError(f"unknown shot {video_id}#{shot_index}") from None

    def keyframe_ordinal(self, video_id: str, shot_index: int, position: int) -> int:
        if not 0 <= position < KEYFRAMES_PER_SHOT:
            raise UnknownShotError(
                f"keyframe position {position} outside 0..{KEYFRAMES_PER_SHOT - 1}"
            )
        return self.shot_ordinal(video_id, shot_index) * KEYFRAMES_PER_SHOT + position

    def shot_ref(self, shot_ord: int) -> ShotRef:
        return ShotRef(
            video_id=self.videos[self.shot_video[shot_ord]],
            shot_index=int(self.shot_index[shot_ord]),
            start_frame=int(self.shot_start[shot_ord]),
            end_frame=int(self.shot_end[shot_ord]),
        )

    def keyframe(self, kf_ord: int) -> Keyframe:
        shot_ord, position = divmod(int(kf_ord), KEYFRAMES_PER_SHOT)
        return Keyframe(self.shot_ref(shot_ord), position, int(self.kf_frame[kf_ord]))

    def shot_of_keyframe(self, kf_ords):
        """Vectorized keyframe ordinal -> shot ordinal."""
        return np.asarray(kf_ords) // KEYFRAMES_PER_SHOT

    def iter_shots(self) -> Iterable[ShotRef]:
        for i in range(self.n_shots):
            yield self.shot_ref(i)

    def iter_keyframes(self) -> Iterable[Keyframe]:
        for i in range(self.n_keyframes):
            yield self.keyframe(i)

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update("\x00".join(self.videos).encode("utf-8"))
        for arr in (self.shot_video, self.shot_index, self.shot_start,
                    self.shot_end, self.kf_frame):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


class CodeStore:
    """Both code widths for every keyframe of one code space, as contiguous
    uint64 words keyed by keyframe ordinal."""

    def __init__(self, table: KeyframeTable, space: CodeSpace,
                 words64: np.ndarray, words256: np.ndarray):
        words64 = np.ascontiguousarray(words64, dtype=np.uint64).reshape(-1)
        words256 = np.ascontiguousarray(words256, dtype=np.uint64).reshape(-1, 4)
        if words64.shape[0] != table.n_keyframes or words256.shape[0] != table.n_keyframes:
            raise ValueError(
                f"store holds {words64.shape[0]}/{words256.shape[0]} codes for "
                f"{table.n_keyframes} keyframes"
            )
        self.table = table
        self.space = CodeSpace(space)
        self.words64 = words64
        self.words256 = words256

    def __len__(self) -> int:
        return self.words64.shape[0]

    @classmethod
    def from_records(cls, table: KeyframeTable, records: Sequence[CodeRecord],
                     space: CodeSpace) -> "CodeStore":
        """Assemble a store from per-keyframe code records; every keyframe
        must be covered exactly once."""
        space = CodeSpace(space)
        n = table.n_keyframes
        words64 = np.zeros(n, dtype=np.uint64)
        words256 = np.zeros((n, 4), dtype=np.uint64)
        seen = np.zeros(n, dtype=bool)
        for rec in records:
            if rec.space != space:
                raise ValueError(f"record for space {rec.space.value} in {space.value} store")
            kf = rec.keyframe
            ordinal = table.keyframe_ordinal(kf.shot.video_id, kf.shot.shot_index, kf.position)
            if seen[ordinal]:
                raise ValueError(
                    f"duplicate code record for keyframe "
                    f"{kf.shot.shot_id}/{kf.position}"
                )
            seen[ordinal] = True
            words64[ordinal] = np.frombuffer(rec.code64.bits, dtype="<u8")[0]
            words256[ordinal] = np.frombuffer(rec.code256.bits, dtype="<u8")
        if not seen.all():
            missing = np.flatnonzero(~seen)
            first = table.keyframe(int(missing[0]))
            raise ValueError(
                f"{missing.size} keyframe(s) without code records, first: "
                f"{first.shot.shot_id}/{first.position}"
            )
        return cls(table, space, words64, words256)

    def code64(self, ordinal: int) -> BinaryCode:
        return BinaryCode(64, self.words64[ordinal].tobytes())

    def code256(self, ordinal: int) -> BinaryCode:
        return BinaryCode(256, self.words256[ordinal].tobytes())

    def checksum64(self) -> int:
        """First 8 bytes of the sha256 of the 64-bit code block; binds index
        snapshots to the codes they were built over."""
        digest = hashlib.sha256(self.words64.tobytes()).digest()
        return int.from_bytes(digest[:8], "little")

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(self.space.value.encode())
        h.update(self.words64.tobytes())
        h.update(self.words256.tobytes())
        return h.hexdigest()
