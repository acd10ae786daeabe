import pytest

from shotsearch.model import (
    BinaryCode,
    Keyframe,
    QueryKind,
    RankedResult,
    ShotRef,
    derive_keyframes,
    shot_key,
    validate_shot_table,
)


def shot(video="v", idx=0, start=0, end=100):
    return ShotRef(video, idx, start, end)


class TestValidateShotTable:
    def test_consistent_table_is_clean(self):
        s = shot()
        report = validate_shot_table([s], derive_keyframes(s))
        assert report.ok
        assert report.issues == []

    def test_missing_keyframe_reported(self):
        s = shot()
        report = validate_shot_table([s], derive_keyframes(s)[:4])
        assert not report.ok
        assert any("keyframe count 4 != 5" in issue for issue in report.issues)

    def test_duplicate_shot_id_reported(self):
        a = shot(start=0, end=10)
        b = shot(start=20, end=30)
        report = validate_shot_table([a, b], derive_keyframes(a))
        assert any("duplicate shot id v#0" in issue for issue in report.issues)

    def test_end_before_start_reported(self):
        s = shot(start=50, end=10)
        kfs = [Keyframe(s, p, 50) for p in range(5)]
        kfs[4] = Keyframe(s, 4, 10)
        report = validate_shot_table([s], kfs)
        assert any("end_frame 10 < start_frame 50" in issue for issue in report.issues)

    def test_unknown_shot_keyframe_reported(self):
        s = shot()
        other = shot(video="w")
        report = validate_shot_table([s], list(derive_keyframes(s)) + [Keyframe(other, 0, 0)])
        assert any("unknown shot w#0" in issue for issue in report.issues)

    def test_decreasing_frames_reported(self):
        s = shot(start=0, end=100)
        kfs = [Keyframe(s, 0, 0), Keyframe(s, 1, 50), Keyframe(s, 2, 40),
               Keyframe(s, 3, 75), Keyframe(s, 4, 100)]
        report = validate_shot_table([s], kfs)
        assert any("decrease" in issue for issue in report.issues)

    def test_endpoint_mismatch_reported(self):
        s = shot(start=0, end=100)
        kfs = [Keyframe(s, 0, 1), Keyframe(s, 1, 25), Keyframe(s, 2, 50),
               Keyframe(s, 3, 75), Keyframe(s, 4, 100)]
        report = validate_shot_table([s], kfs)
        assert any("expected start_frame" in issue for issue in report.issues)


class TestDeriveKeyframes:
    def test_quarter_points(self):
        kfs = derive_keyframes(shot(start=100, end=200))
        assert [kf.frame_number for kf in kfs] == [100, 125, 150, 175, 200]

    def test_rounding_down(self):
        kfs = derive_keyframes(shot(start=0, end=10))
        assert [kf.frame_number for kf in kfs] == [0, 2, 5, 7, 10]

    def test_single_frame_shot(self):
        kfs = derive_keyframes(shot(start=7, end=7))
        assert [kf.frame_number for kf in kfs] == [7] * 5
        assert [kf.position for kf in kfs] == [0, 1, 2, 3, 4]


class TestBinaryCode:
    def test_widths_enforced(self):
        with pytest.raises(ValueError):
            BinaryCode(128, bytes(16))
        with pytest.raises(ValueError):
            BinaryCode(64, bytes(7))

    def test_int_round_trip(self):
        code = BinaryCode.from_int(64, 0xDEADBEEF)
        assert code.to_int() == 0xDEADBEEF
        big = BinaryCode.from_int(256, (1 << 255) | 1)
        assert big.to_int() == (1 << 255) | 1

    def test_popcount(self):
        assert BinaryCode.from_int(64, 0).popcount() == 0
        assert BinaryCode.from_int(64, 2**64 - 1).popcount() == 64


class TestRankedResult:
    def test_rejects_increasing_scores(self):
        with pytest.raises(ValueError, match="non-increasing"):
            RankedResult(
                entries=((shot(idx=0), 0.5), (shot(idx=1), 0.9)),
                query_kind=QueryKind.CONCEPT,
            )

    def test_rejects_duplicate_shots(self):
        with pytest.raises(ValueError, match="twice"):
            RankedResult(
                entries=((shot(), 0.9), (shot(), 0.5)),
                query_kind=QueryKind.CONCEPT,
            )

    def test_same_key_different_frames_is_still_duplicate(self):
        with pytest.raises(ValueError, match="twice"):
            RankedResult(
                entries=((shot(start=0, end=5), 0.9), (shot(start=6, end=9), 0.5)),
                query_kind=QueryKind.TEXT,
            )


class TestShotKey:
    def test_from_ref_string_and_tuple(self):
        s = shot(video="tagesschau", idx=12)
        assert shot_key(s) == ("tagesschau", 12)
        assert shot_key("tagesschau#12") == ("tagesschau", 12)
        assert shot_key(("tagesschau", 12)) == ("tagesschau", 12)

    def test_video_ids_with_hash_render_round_trip(self):
        s = ShotRef("a#b", 3, 0, 1)
        assert shot_key(s.shot_id) == ("a#b", 3)

    def test_malformed_string_rejected(self):
        with pytest.raises(ValueError):
            shot_key("no-separator")
        with pytest.raises(ValueError):
            shot_key("v#notanint")
