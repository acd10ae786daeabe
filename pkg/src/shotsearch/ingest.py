"""Loaders and writers for the on-disk archive formats.

Text formats are UTF-8, tab-separated, one record per line:

  manifest     video_id <TAB> shot_index <TAB> start_frame <TAB> end_frame
               K <TAB> video_id <TAB> shot_index <TAB> position <TAB> frame_number
  annotations  video_id <TAB> shot_index <TAB> kind <TAB> label <TAB> probability
  text         video_id <TAB> shot_index <TAB> frame_number <TAB> text...

Code files are binary, little-endian: magic "SHGC", u16 version=1, u8 space
(0=semantic, 1=low_level), u64 record count; each record is u32 video-id
string-table offset, u32 shot_index, u8 position, 8 bytes of 64-bit code,
32 bytes of 256-bit code; the deduplicated string table (u16 length + UTF-8
bytes per entry, offsets relative to the table start) is appended after the
records.

Every malformed input surfaces as a structured error (FormatError,
UnknownShotError, ValidationFailure), never a crash.
"""

from __future__ import annotations

import struct
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError, UnknownShotError, ValidationFailure
from .lexical import tokenize
from .model import (
    KEYFRAMES_PER_SHOT,
    AnnotationEntry,
    AnnotationKind,
    BinaryCode,
    CodeRecord,
    CodeSpace,
    Keyframe,
    ShotRef,
    TextOccurrence,
    derive_keyframes,
    validate_shot_table,
)
from .store import CodeStore, KeyframeTable

CODES_MAGIC = b"SHGC"
CODES_VERSION = 1
_SPACE_BYTE = {CodeSpace.SEMANTIC: 0, CodeSpace.LOW_LEVEL: 1}
_BYTE_SPACE = {v: k for k, v in _SPACE_BYTE.items()}
_HEADER = struct.Struct("<4sHBQ")
_RECORD = np.dtype({
    "names": ["video_off", "shot_index", "position", "code64", "code256"],
    "formats": ["<u4", "<u4", "u1", "<u8", "(4,)<u8"],
    "offsets": [0, 4, 8, 9, 17],
    "itemsize": 49,
})


def _int_field(value: str, name: str, path, lineno: int, minimum: int | None = 0) -> int:
    try:
        parsed = int(value)
    except ValueError:
        raise FormatError(f"{name} {value!r} is not an integer", path=path, line=lineno) from None
    if minimum is not None and parsed < minimum:
        raise FormatError(f"{name} {parsed} is negative", path=path, line=lineno)
    return parsed


def _lines(path):
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if line.strip():
                    yield lineno, line
    except UnicodeDecodeError as exc:
        raise FormatError(f"not valid UTF-8: {exc}", path=path) from None


def load_manifest(path) -> tuple[list[ShotRef], list[Keyframe]]:
    """Load and validate shots; keyframes are explicit K-lines or derived.

    Raises FormatError with a line number on parse problems and
    ValidationFailure carrying the full report on invariant violations.
    """
    shot_rows: list[ShotRef] = []
    kf_rows: list[tuple[int, str, int, int, int]] = []
    for lineno, line in _lines(path):
        parts = line.split("\t")
        if parts[0] == "K":
            if len(parts) != 5:
                raise FormatError(
                    f"keyframe line has {len(parts)} fields, expected 5",
                    path=path, line=lineno,
                )
            video_id = parts[1]
            idx = _int_field(parts[2], "shot_index", path, lineno)
            position = _int_field(parts[3], "position", path, lineno)
            frame = _int_field(parts[4], "frame_number", path, lineno)
            if not 0 <= position < KEYFRAMES_PER_SHOT:
                raise FormatError(
                    f"position {position} outside 0..{KEYFRAMES_PER_SHOT - 1}",
                    path=path, line=lineno,
                )
            kf_rows.append((lineno, video_id, idx, position, frame))
        else:
            if len(parts) != 4:
                raise FormatError(
                    f"shot line has {len(parts)} fields, expected 4",
                    path=path, line=lineno,
                )
            video_id = parts[0]
            if not video_id:
                raise FormatError("empty video_id", path=path, line=lineno)
            idx = _int_field(parts[1], "shot_index", path, lineno)
            start = _int_field(parts[2], "start_frame", path, lineno, minimum=None)
            end = _int_field(parts[3], "end_frame", path, lineno, minimum=None)
            shot_rows.append(ShotRef(video_id, idx, start, end))

    by_key = {}
    for shot in shot_rows:
        by_key.setdefault(shot.key, shot)
    explicit: dict[tuple[str, int], list[Keyframe]] = {}
    keyframes: list[Keyframe] = []
    for lineno, video_id, idx, position, frame in kf_rows:
        shot = by_key.get((video_id, idx))
        if shot is None:
            raise FormatError(
                f"keyframe references unknown shot {video_id}#{idx}",
                path=path, line=lineno,
            )
        kf = Keyframe(shot, position, frame)
        explicit.setdefault(shot.key, []).append(kf)
        keyframes.append(kf)
    for shot in shot_rows:
        if shot.key not in explicit:
            keyframes.extend(derive_keyframes(shot))

    report = validate_shot_table(shot_rows, keyframes)
    if not report.ok:
        raise ValidationFailure(report)
    return shot_rows, keyframes


def write_manifest(path, shots: Sequence[ShotRef], keyframes: Iterable[Keyframe]):
    """Write a manifest with explicit keyframe lines."""
    with open(path, "w", encoding="utf-8") as fh:
        for shot in shots:
            fh.write(f"{shot.video_id}\t{shot.shot_index}\t{shot.start_frame}\t{shot.end_frame}\n")
        for kf in keyframes:
            fh.write(
                f"K\t{kf.shot.video_id}\t{kf.shot.shot_index}\t{kf.position}\t{kf.frame_number}\n"
            )


def load_annotations(path, shots: Sequence[ShotRef]) -> list[AnnotationEntry]:
    """Load concept/person annotations; rejects out-of-range probabilities,
    unknown shots, and duplicate (shot, label) pairs."""
    by_key = {shot.key: shot for shot in shots}
    seen: dict[tuple[tuple[str, int], str], int] = {}
    entries: list[AnnotationEntry] = []
    for lineno, line in _lines(path):
        parts = line.split("\t")
        if len(parts) != 5:
            raise FormatError(
                f"expected 5 tab-separated fields, got {len(parts)}",
                path=path, line=lineno,
            )
        video_id, idx_s, kind_s, label, prob_s = parts
        idx = _int_field(idx_s, "shot_index", path, lineno)
        try:
            kind = AnnotationKind(kind_s)
        except ValueError:
            raise FormatError(
                f"kind {kind_s!r} is not 'concept' or 'person'", path=path, line=lineno
            ) from None
        if not label.strip():
            raise FormatError("empty label", path=path, line=lineno)
        label = label.strip()
        try:
            prob = float(prob_s)
        except ValueError:
            raise FormatError(f"probability {prob_s!r} is not a number", path=path, line=lineno) from None
        if not 0.0 <= prob <= 1.0:  # also rejects NaN
            raise FormatError(f"probability {prob} outside [0, 1]", path=path, line=lineno)
        shot = by_key.get((video_id, idx))
        if shot is None:
            raise UnknownShotError(f"{path}:{lineno}: unknown shot {video_id}#{idx}")
        dup_key = ((video_id, idx), label)
        if dup_key in seen:
            raise FormatError(
                f"duplicate annotation for ({video_id}#{idx}, {label!r}); "
                f"first seen on line {seen[dup_key]}",
                path=path, line=lineno,
            )
        seen[dup_key] = lineno
        entries.append(AnnotationEntry(shot, label, kind, prob))
    return entries


def write_annotations(path, entries: Iterable[AnnotationEntry]):
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(
                f"{e.shot.video_id}\t{e.shot.shot_index}\t{e.kind.value}\t"
                f"{e.label}\t{e.probability!r}\n"
            )


def load_text(path, shots: Sequence[ShotRef]) -> list[TextOccurrence]:
    """Load recognized text; multi-word strings tokenize into one occurrence
    per word, NFC-normalized and case-folded."""
    by_key = {shot.key: shot for shot in shots}
    occurrences: list[TextOccurrence] = []
    for lineno, line in _lines(path):
        parts = line.split("\t", 3)
        if len(parts) != 4:
            raise FormatError(
                f"expected 4 tab-separated fields, got {len(parts)}",
                path=path, line=lineno,
            )
        video_id, idx_s, frame_s, text = parts
        idx = _int_field(idx_s, "shot_index", path, lineno)
        frame = _int_field(frame_s, "frame_number", path, lineno)
        shot = by_key.get((video_id, idx))
        if shot is None:
            raise UnknownShotError(f"{path}:{lineno}: unknown shot {video_id}#{idx}")
        tokens = tokenize(text)
        if not tokens:
            raise FormatError("text is empty after tokenization", path=path, line=lineno)
        for token in tokens:
            occurrences.append(TextOccurrence(shot, frame, token))
    return occurrences


def write_text(path, occurrences: Iterable[TextOccurrence]):
    with open(path, "w", encoding="utf-8") as fh:
        for occ in occurrences:
            fh.write(
                f"{occ.shot.video_id}\t{occ.shot.shot_index}\t{occ.frame_number}\t{occ.word}\n"
            )


def _read_codes_raw(path, expected_space: CodeSpace):
    """Parse header, record block, and string table; shared by both loaders."""
    expected_space = CodeSpace(expected_space)
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise FormatError("file shorter than the header", path=path)
    magic, version, space_byte, count = _HEADER.unpack_from(blob, 0)
    if magic != CODES_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {CODES_MAGIC!r}", path=path)
    if version != CODES_VERSION:
        raise FormatError(f"unsupported version {version}", path=path)
    if space_byte not in _BYTE_SPACE:
        raise FormatError(f"unknown code space byte {space_byte}", path=path)
    space = _BYTE_SPACE[space_byte]
    if space != expected_space:
        raise FormatError(
            f"file holds {space.value} codes, expected {expected_space.value}", path=path
        )
    body_end = _HEADER.size + _RECORD.itemsize * count
    if len(blob) < body_end:
        raise FormatError(
            f"truncated: {count} records need {body_end} bytes, file has {len(blob)}",
            path=path,
        )
    records = np.frombuffer(blob, dtype=_RECORD, count=count, offset=_HEADER.size)
    table = blob[body_end:]

    strings: dict[int, str] = {}

    def video_at(offset: int) -> str:
        cached = strings.get(offset)
        if cached is not None:
            return cached
        if offset + 2 > len(table):
            raise FormatError(f"string offset {offset} outside table", path=path)
        (length,) = struct.unpack_from("<H", table, offset)
        end = offset + 2 + length
        if end > len(table):
            raise FormatError(f"string at offset {offset} runs past the table", path=path)
        try:
            value = table[offset + 2:end].decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError(f"string at offset {offset} is not UTF-8", path=path) from None
        strings[offset] = value
        return value

    return records, video_at, space


def load_codes(path, expected_space: CodeSpace,
               keyframes: Sequence[Keyframe]) -> list[CodeRecord]:
    """Load per-keyframe code records; every record must reference a known
    keyframe."""
    known = {(kf.shot.video_id, kf.shot.shot_index, kf.position): kf for kf in keyframes}
    records, video_at, space = _read_codes_raw(path, expected_space)
    out: list[CodeRecord] = []
    for row in records:
        video_id = video_at(int(row["video_off"]))
        key = (video_id, int(row["shot_index"]), int(row["position"]))
        kf = known.get(key)
        if kf is None:
            raise UnknownShotError(
                f"{path}: code record references unknown keyframe "
                f"{key[0]}#{key[1]}/{key[2]}"
            )
        out.append(CodeRecord(
            keyframe=kf,
            space=space,
            code64=BinaryCode(64, row["code64"].tobytes()),
            code256=BinaryCode(256, row["code256"].tobytes()),
        ))
    return out


def load_code_store(path, expected_space: CodeSpace, table: KeyframeTable) -> CodeStore:
    """Array-path loader: build a CodeStore straight from the file without
    materializing per-record objects; used for large archives."""
    records, video_at, space = _read_codes_raw(path, expected_space)
    n = table.n_keyframes
    words64 = np.zeros(n, dtype=np.uint64)
    words256 = np.zeros((n, 4), dtype=np.uint64)
    seen = np.zeros(n, dtype=bool)
    shot_ords = np.empty(len(records), dtype=np.int64)
    for i, row in enumerate(records):
        video_id = video_at(int(row["video_off"]))
        try:
            shot_ords[i] = table.shot_ordinal(video_id, int(row["shot_index"]))
        except UnknownShotError:
            raise UnknownShotError(
                f"{path}: code record references unknown keyframe "
                f"{video_id}#{int(row['shot_index'])}/{int(row['position'])}"
            ) from None
    positions = records["position"].astype(np.int64)
    if positions.size and positions.max() >= KEYFRAMES_PER_SHOT:
        bad = int(np.argmax(positions >= KEYFRAMES_PER_SHOT))
        raise FormatError(
            f"record {bad} has position {positions[bad]} outside 0..{KEYFRAMES_PER_SHOT - 1}",
            path=path,
        )
    ordinals = shot_ords * KEYFRAMES_PER_SHOT + positions
    if records.size:
        uniq, counts = np.unique(ordinals, return_counts=True)
        if (counts > 1).any():
            kf = table.keyframe(int(uniq[counts > 1][0]))
            raise FormatError(
                f"duplicate code record for keyframe {kf.shot.shot_id}/{kf.position}",
                path=path,
            )
    seen[ordinals] = True
    words64[ordinals] = records["code64"]
    words256[ordinals] = records["code256"]
    if not seen.all():
        missing = np.flatnonzero(~seen)
        kf = table.keyframe(int(missing[0]))
        raise FormatError(
            f"{missing.size} keyframe(s) without code records, first: "
            f"{kf.shot.shot_id}/{kf.position}",
            path=path,
        )
    return CodeStore(table, space, words64, words256)


def write_codes(path, space: CodeSpace, records: Iterable[CodeRecord]):
    """Write a code file from CodeRecord objects."""
    space = CodeSpace(space)
    rows = list(records)
    table = bytearray()
    offsets: dict[str, int] = {}

    def offset_of(video_id: str) -> int:
        if video_id not in offsets:
            encoded = video_id.encode("utf-8")
            offsets[video_id] = len(table)
            table.extend(struct.pack("<H", len(encoded)))
            table.extend(encoded)
        return offsets[video_id]

    body = np.zeros(len(rows), dtype=_RECORD)
    for i, rec in enumerate(rows):
        if rec.space != space:
            raise ValueError(f"record for space {rec.space.value} in {space.value} file")
        kf = rec.keyframe
        body[i]["video_off"] = offset_of(kf.shot.video_id)
        body[i]["shot_index"] = kf.shot.shot_index
        body[i]["position"] = kf.position
        body[i]["code64"] = np.frombuffer(rec.code64.bits, dtype="<u8")[0]
        body[i]["code256"] = np.frombuffer(rec.code256.bits, dtype="<u8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CODES_MAGIC, CODES_VERSION, _SPACE_BYTE[space], len(rows)))
        fh.write(body.tobytes())
        fh.write(bytes(table))


def write_code_store(path, store: CodeStore):
    """Write a code file straight from a CodeStore's arrays."""
    table = store.table
    strings = bytearray()
    offsets = np.empty(len(table.videos), dtype=np.uint32)
    for i, video_id in enumerate(table.videos):
        encoded = video_id.encode("utf-8")
        offsets[i] = len(strings)
        strings.extend(struct.pack("<H", len(encoded)))
        strings.extend(encoded)
    n = table.n_keyframes
    body = np.zeros(n, dtype=_RECORD)
    shot_ords = np.arange(n) // KEYFRAMES_PER_SHOT
    body["video_off"] = offsets[table.shot_video[shot_ords]]
    body["shot_index"] = table.shot_index[shot_ords]
    body["position"] = (np.arange(n) % KEYFRAMES_PER_SHOT).astype(np.uint8)
    body["code64"] = store.words64
    body["code256"] = store.words256
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(CODES_MAGIC, CODES_VERSION, _SPACE_BYTE[store.space], n))
        fh.write(body.tobytes())
        fh.write(bytes(strings))
