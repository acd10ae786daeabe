"""Shared domain vocabulary: shots, keyframes, binary codes, annotations,
text occurrences, and ranked results.

All types here are immutable value objects and safe to share between
concurrent tasks. Identity of a shot is the pair (video_id, shot_index),
rendered externally as ``video_id#shot_index``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

CODE_WIDTHS = (64, 256)
KEYFRAMES_PER_SHOT = 5


class CodeSpace(str, Enum):
    SEMANTIC = "semantic"
    LOW_LEVEL = "low_level"


class AnnotationKind(str, Enum):
    CONCEPT = "concept"
    PERSON = "person"


class QueryKind(str, Enum):
    SIMILARITY = "similarity"
    CONCEPT = "concept"
    PERSON = "person"
    TEXT = "text"


@dataclass(frozen=True, slots=True)
class ShotRef:
    """A shot, the temporal unit of retrieval."""

    video_id: str
    shot_index: int
    start_frame: int
    end_frame: int

    @property
    def key(self) -> tuple[str, int]:
        """Archive-wide identity of this shot."""
        return (self.video_id, self.shot_index)

    @property
    def shot_id(self) -> str:
        return f"{self.video_id}#{self.shot_index}"


@dataclass(frozen=True, slots=True)
class Keyframe:
    """One of the five representative frames of a shot.

    Position 0 is the first frame of the shot, position 4 the last; the
    three in between sit at quarter points of the shot span.
    """

    shot: ShotRef
    position: int
    frame_number: int


def derive_keyframes(shot: ShotRef) -> tuple[Keyframe, ...]:
    """Default keyframe placement: first, last, and the frames at 1/4, 1/2,
    3/4 of the shot span (rounded down)."""
    span = shot.end_frame - shot.start_frame
    return tuple(
        Keyframe(shot, p, shot.start_frame + (span * p) // 4)
        for p in range(KEYFRAMES_PER_SHOT)
    )


@dataclass(frozen=True, slots=True)
class BinaryCode:
    """Fixed-width bit string; only 64 and 256 bit widths exist.

    Bit b lives in byte b//8 at bit b%8 (LSB first); ``bits`` is the
    little-endian byte rendering used verbatim in code files.
    """

    width: int
    bits: bytes

    def __post_init__(self):
        if self.width not in CODE_WIDTHS:
            raise ValueError(f"code width must be one of {CODE_WIDTHS}, got {self.width}")
        if len(self.bits) * 8 != self.width:
            raise ValueError(
                f"expected {self.width // 8} code bytes, got {len(self.bits)}"
            )

    @classmethod
    def from_int(cls, width: int, value: int) -> "BinaryCode":
        if width not in CODE_WIDTHS:
            raise ValueError(f"code width must be one of {CODE_WIDTHS}, got {width}")
        return cls(width, int(value).to_bytes(width // 8, "little"))

    def to_int(self) -> int:
        return int.from_bytes(self.bits, "little")

    def popcount(self) -> int:
        return self.to_int().bit_count()


@dataclass(frozen=True, slots=True)
class CodeRecord:
    """Both code widths for one keyframe in one code space."""

    keyframe: Keyframe
    space: CodeSpace
    code64: BinaryCode
    code256: BinaryCode

    def __post_init__(self):
        if self.code64.width != 64 or self.code256.width != 256:
            raise ValueError("CodeRecord needs a 64-bit and a 256-bit code")


@dataclass(frozen=True, slots=True)
class AnnotationEntry:
    """A (shot, label, probability) triple for a concept or person."""

    shot: ShotRef
    label: str
    kind: AnnotationKind
    probability: float

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


@dataclass(frozen=True, slots=True)
class TextOccurrence:
    """A recognized on-screen word in one shot, tokenized at ingest."""

    shot: ShotRef
    frame_number: int
    word: str

    def __post_init__(self):
        if not self.word or any(c.isspace() for c in self.word):
            raise ValueError(f"word must be non-empty and whitespace-free: {self.word!r}")


@dataclass(frozen=True)
class RankedResult:
    """Ordered shot list with higher-is-better scores; the one contract all
    four query families share."""

    entries: tuple[tuple[ShotRef, float], ...]
    query_kind: QueryKind

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        prev = None
        for shot, score in self.entries:
            if shot.key in seen:
                raise ValueError(f"shot {shot.shot_id} appears twice in ranking")
            seen.add(shot.key)
            if prev is not None and score > prev:
                raise ValueError("scores must be non-increasing in rank order")
            prev = score

    def __len__(self) -> int:
        return len(self.entries)

    def shots(self) -> list[ShotRef]:
        return [shot for shot, _ in self.entries]


@dataclass
class ValidationReport:
    """Report-style outcome of table validation; empty iff consistent."""

    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, issue: str):
        self.issues.append(issue)

    def __bool__(self) -> bool:  # truthy when clean, so `if report:` reads naturally
        return self.ok


def validate_shot_table(
    shots: Sequence[ShotRef], keyframes: Iterable[Keyframe]
) -> ValidationReport:
    """Check every shot/keyframe invariant and report all violations.

    Never raises: malformed tables come back as a populated report.
    """
    report = ValidationReport()
    by_key: dict[tuple[str, int], ShotRef] = {}
    for shot in shots:
        if shot.key in by_key:
            report.add(f"duplicate shot id {shot.shot_id}")
            continue
        by_key[shot.key] = shot
        if shot.shot_index < 0:
            report.add(f"shot {shot.shot_id}: negative shot_index")
        if shot.start_frame < 0:
            report.add(f"shot {shot.shot_id}: negative start_frame {shot.start_frame}")
        if shot.end_frame < shot.start_frame:
            report.add(
                f"shot {shot.shot_id}: end_frame {shot.end_frame} < "
                f"start_frame {shot.start_frame}"
            )

    grouped: dict[tuple[str, int], list[Keyframe]] = {key: [] for key in by_key}
    for kf in keyframes:
        if kf.shot.key not in by_key:
            report.add(f"keyframe references unknown shot {kf.shot.shot_id}")
            continue
        grouped[kf.shot.key].append(kf)

    for key, group in grouped.items():
        shot = by_key[key]
        if len(group) != KEYFRAMES_PER_SHOT:
            report.add(
                f"shot {shot.shot_id}: keyframe count {len(group)} != {KEYFRAMES_PER_SHOT}"
            )
            continue
        positions = sorted(kf.position for kf in group)
        if positions != list(range(KEYFRAMES_PER_SHOT)):
            report.add(f"shot {shot.shot_id}: keyframe positions {positions} != [0..4]")
            continue
        ordered = sorted(group, key=lambda kf: kf.position)
        if any(kf.frame_number < 0 for kf in ordered):
            report.add(f"shot {shot.shot_id}: negative keyframe frame_number")
        if ordered[0].frame_number != shot.start_frame:
            report.add(
                f"shot {shot.shot_id}: keyframe 0 at frame {ordered[0].frame_number}, "
                f"expected start_frame {shot.start_frame}"
            )
        if ordered[-1].frame_number != shot.end_frame:
            report.add(
                f"shot {shot.shot_id}: keyframe 4 at frame {ordered[-1].frame_number}, "
                f"expected end_frame {shot.end_frame}"
            )
        for a, b in zip(ordered, ordered[1:]):
            if b.frame_number < a.frame_number:
                report.add(
                    f"shot {shot.shot_id}: keyframe frames decrease between "
                    f"positions {a.position} and {b.position}"
                )
                break
    return report


def shot_key(value) -> tuple[str, int]:
    """Normalize a ShotRef, (video_id, shot_index) pair, or 'video#index'
    string to the identity tuple."""
    if isinstance(value, ShotRef):
        return value.key
    if isinstance(value, str):
        video_id, sep, idx = value.rpartition("#")
        if not sep or not video_id:
            raise ValueError(f"malformed shot id {value!r}, expected 'video_id#shot_index'")
        try:
            return (video_id, int(idx))
        except ValueError:
            raise ValueError(f"malformed shot id {value!r}: shot_index must be an integer")
    video_id, idx = value
    return (str(video_id), int(idx))
