import numpy as np
import pytest

from shotsearch.errors import (
    FormatError,
    ShotSearchError,
    UnknownShotError,
    ValidationFailure,
)
from shotsearch.ingest import (
    load_annotations,
    load_code_store,
    load_codes,
    load_manifest,
    load_text,
    write_annotations,
    write_code_store,
    write_codes,
    write_manifest,
    write_text,
)
from shotsearch.model import (
    AnnotationKind,
    BinaryCode,
    CodeRecord,
    CodeSpace,
    validate_shot_table,
)
from shotsearch.store import CodeStore, KeyframeTable

from conftest import make_shots, random_store


class TestManifest:
    def test_two_shot_manifest(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("tv\t0\t0\t100\ntv\t1\t101\t200\n", encoding="utf-8")
        shots, keyframes = load_manifest(path)
        assert len(shots) == 2
        assert len(keyframes) == 10
        assert validate_shot_table(shots, keyframes).ok

    def test_end_before_start_is_validation_error(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("tv\t0\t100\t50\n", encoding="utf-8")
        with pytest.raises(ValidationFailure) as err:
            load_manifest(path)
        assert any("end_frame" in issue for issue in err.value.report.issues)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("", encoding="utf-8")
        shots, keyframes = load_manifest(path)
        assert shots == [] and keyframes == []

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("tv\t0\t0\t100\ntv\tx\t0\t100\n", encoding="utf-8")
        with pytest.raises(FormatError) as err:
            load_manifest(path)
        assert err.value.line == 2

    def test_explicit_keyframes(self, tmp_path):
        path = tmp_path / "m.tsv"
        lines = ["tv\t0\t10\t90\n"]
        for pos, frame in enumerate([10, 30, 50, 70, 90]):
            lines.append(f"K\ttv\t0\t{pos}\t{frame}\n")
        path.write_text("".join(lines), encoding="utf-8")
        shots, keyframes = load_manifest(path)
        assert [kf.frame_number for kf in keyframes] == [10, 30, 50, 70, 90]

    def test_partial_explicit_keyframes_fail_validation(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("tv\t0\t10\t90\nK\ttv\t0\t0\t10\n", encoding="utf-8")
        with pytest.raises(ValidationFailure) as err:
            load_manifest(path)
        assert any("count 1 != 5" in issue for issue in err.value.report.issues)

    def test_keyframe_for_unknown_shot(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("K\ttv\t0\t0\t10\n", encoding="utf-8")
        with pytest.raises(FormatError, match="unknown shot"):
            load_manifest(path)

    def test_round_trip_validates_clean(self, tmp_path):
        shots, keyframes = make_shots(17, videos=3)
        path = tmp_path / "m.tsv"
        write_manifest(path, shots, keyframes)
        shots2, keyframes2 = load_manifest(path)
        assert validate_shot_table(shots2, keyframes2).ok
        assert [s.key for s in shots2] == [s.key for s in shots]
        assert [(k.shot.key, k.position, k.frame_number) for k in keyframes2] == [
            (k.shot.key, k.position, k.frame_number) for k in sorted(
                keyframes, key=lambda k: (shots.index(k.shot), k.position)
            )
        ]


def make_code_records(keyframes, seed=0, space=CodeSpace.SEMANTIC):
    rng = np.random.default_rng(seed)
    records = []
    for kf in keyframes:
        records.append(CodeRecord(
            keyframe=kf,
            space=space,
            code64=BinaryCode(64, rng.bytes(8)),
            code256=BinaryCode(256, rng.bytes(32)),
        ))
    return records


class TestCodes:
    def test_round_trip(self, tmp_path):
        shots, keyframes = make_shots(2)
        records = make_code_records(keyframes)
        path = tmp_path / "codes.shgc"
        write_codes(path, CodeSpace.SEMANTIC, records)
        loaded = load_codes(path, CodeSpace.SEMANTIC, keyframes)
        assert len(loaded) == 10
        for a, b in zip(records, loaded):
            assert a.keyframe == b.keyframe
            assert a.code64.bits == b.code64.bits
            assert a.code256.bits == b.code256.bits

    def test_unknown_keyframe_named_in_error(self, tmp_path):
        shots, keyframes = make_shots(2)
        records = make_code_records(keyframes)
        path = tmp_path / "codes.shgc"
        write_codes(path, CodeSpace.SEMANTIC, records)
        with pytest.raises(UnknownShotError, match=r"v000#0/0"):
            load_codes(path, CodeSpace.SEMANTIC, keyframes[5:])

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "codes.shgc"
        path.write_bytes(b"XXXX" + bytes(32))
        with pytest.raises(FormatError, match="magic"):
            load_codes(path, CodeSpace.SEMANTIC, [])

    def test_truncated_file(self, tmp_path):
        shots, keyframes = make_shots(2)
        path = tmp_path / "codes.shgc"
        write_codes(path, CodeSpace.SEMANTIC, make_code_records(keyframes))
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(FormatError):
            load_codes(path, CodeSpace.SEMANTIC, keyframes)

    def test_space_mismatch(self, tmp_path):
        shots, keyframes = make_shots(1)
        path = tmp_path / "codes.shgc"
        write_codes(path, CodeSpace.SEMANTIC, make_code_records(keyframes))
        with pytest.raises(FormatError, match="semantic"):
            load_codes(path, CodeSpace.LOW_LEVEL, keyframes)

    def test_store_loader_matches_object_loader(self, tmp_path):
        shots, keyframes = make_shots(4, videos=2)
        table = KeyframeTable.from_tables(shots, keyframes)
        records = make_code_records(keyframes, seed=1)
        path = tmp_path / "codes.shgc"
        write_codes(path, CodeSpace.SEMANTIC, records)
        via_objects = CodeStore.from_records(
            table, load_codes(path, CodeSpace.SEMANTIC, keyframes), CodeSpace.SEMANTIC
        )
        via_arrays = load_code_store(path, CodeSpace.SEMANTIC, table)
        assert (via_objects.words64 == via_arrays.words64).all()
        assert (via_objects.words256 == via_arrays.words256).all()

    def test_store_round_trip_via_arrays(self, tmp_path):
        store = random_store(6, seed=3)
        path = tmp_path / "codes.shgc"
        write_code_store(path, store)
        loaded = load_code_store(path, CodeSpace.SEMANTIC, store.table)
        assert (loaded.words64 == store.words64).all()
        assert (loaded.words256 == store.words256).all()

    def test_missing_keyframes_detected(self, tmp_path):
        shots, keyframes = make_shots(2)
        table = KeyframeTable.from_tables(shots, keyframes)
        records = make_code_records(keyframes)[:-1]
        path = tmp_path / "codes.shgc"
        write_codes(path, CodeSpace.SEMANTIC, records)
        with pytest.raises(FormatError, match="without code records"):
            load_code_store(path, CodeSpace.SEMANTIC, table)


class TestAnnotations:
    def test_accepted_entry(self, tmp_path):
        shots, _ = make_shots(2)
        path = tmp_path / "a.tsv"
        path.write_text("v000\t0\tconcept\tapplause\t0.97\n", encoding="utf-8")
        entries = load_annotations(path, shots)
        assert entries[0].label == "applause"
        assert entries[0].probability == 0.97
        assert entries[0].kind is AnnotationKind.CONCEPT

    def test_probability_out_of_range(self, tmp_path):
        shots, _ = make_shots(1)
        path = tmp_path / "a.tsv"
        path.write_text("v000\t0\tconcept\tapplause\t1.3\n", encoding="utf-8")
        with pytest.raises(FormatError, match=r"1\.3"):
            load_annotations(path, shots)
        path.write_text("v000\t0\tconcept\tapplause\tnan\n", encoding="utf-8")
        with pytest.raises(FormatError):
            load_annotations(path, shots)

    def test_duplicate_names_both_lines(self, tmp_path):
        shots, _ = make_shots(1)
        path = tmp_path / "a.tsv"
        path.write_text(
            "v000\t0\tconcept\tapplause\t0.9\n"
            "v000\t0\tperson\tapplause\t0.8\n",
            encoding="utf-8",
        )
        with pytest.raises(FormatError) as err:
            load_annotations(path, shots)
        assert err.value.line == 2
        assert "line 1" in str(err.value)

    def test_unknown_shot(self, tmp_path):
        shots, _ = make_shots(1)
        path = tmp_path / "a.tsv"
        path.write_text("nope\t9\tconcept\tapplause\t0.9\n", encoding="utf-8")
        with pytest.raises(UnknownShotError):
            load_annotations(path, shots)

    def test_bad_kind(self, tmp_path):
        shots, _ = make_shots(1)
        path = tmp_path / "a.tsv"
        path.write_text("v000\t0\tobject\tapplause\t0.9\n", encoding="utf-8")
        with pytest.raises(FormatError, match="kind"):
            load_annotations(path, shots)

    def test_round_trip(self, tmp_path):
        shots, _ = make_shots(3)
        from shotsearch.model import AnnotationEntry

        entries = [
            AnnotationEntry(shots[0], "applause", AnnotationKind.CONCEPT, 0.9),
            AnnotationEntry(shots[1], "erich honecker", AnnotationKind.PERSON, 0.75),
        ]
        path = tmp_path / "a.tsv"
        write_annotations(path, entries)
        loaded = load_annotations(path, shots)
        assert [(e.shot.key, e.label, e.kind, e.probability) for e in loaded] == [
            (e.shot.key, e.label, e.kind, e.probability) for e in entries
        ]


class TestText:
    def test_single_word_casefolded(self, tmp_path):
        shots, _ = make_shots(1)
        path = tmp_path / "t.tsv"
        path.write_text("v000\t0\t12\tPlanerfüllung\n", encoding="utf-8")
        occurrences = load_text(path, shots)
        assert len(occurrences) == 1
        assert occurrences[0].word == "planerfüllung"

    def test_multi_word_tokenized(self, tmp_path):
        shots, _ = make_shots(1)
        path = tmp_path / "t.tsv"
        path.write_text("v000\t0\t12\tRauchen verboten\n", encoding="utf-8")
        occurrences = load_text(path, shots)
        assert [o.word for o in occurrences] == ["rauchen", "verboten"]

    def test_whitespace_only_rejected(self, tmp_path):
        shots, _ = make_shots(1)
        path = tmp_path / "t.tsv"
        path.write_text("v000\t0\t12\t   \n", encoding="utf-8")
        with pytest.raises(FormatError, match="empty"):
            load_text(path, shots)

    def test_unknown_shot(self, tmp_path):
        shots, _ = make_shots(1)
        path = tmp_path / "t.tsv"
        path.write_text("vx\t0\t12\twort\n", encoding="utf-8")
        with pytest.raises(UnknownShotError):
            load_text(path, shots)

    def test_round_trip(self, tmp_path):
        shots, _ = make_shots(2)
        path = tmp_path / "t.tsv"
        path.write_text("v000\t0\t5\tNationale Front\nv001\t0\t9\tPrisma\n", encoding="utf-8")
        occurrences = load_text(path, shots)
        path2 = tmp_path / "t2.tsv"
        write_text(path2, occurrences)
        again = load_text(path2, shots)
        assert [(o.shot.key, o.frame_number, o.word) for o in again] == [
            (o.shot.key, o.frame_number, o.word) for o in occurrences
        ]


class TestFuzzing:
    """Malformed inputs must fail with a structured error, never crash."""

    def test_text_format_fuzz(self, tmp_path):
        rng = np.random.default_rng(99)
        shots, keyframes = make_shots(2)
        loaders = [
            lambda p: load_manifest(p),
            lambda p: load_annotations(p, shots),
            lambda p: load_text(p, shots),
        ]
        corpus = [
            "v000\t0\t0\t100",
            "K\tv000\t0\t0\t0",
            "v000\t0\tconcept\tapplause\t0.9",
            "v000\t0\t12\twort",
        ]
        for trial in range(120):
            base = corpus[int(rng.integers(0, len(corpus)))]
            chars = list(base)
            for _ in range(int(rng.integers(1, 6))):
                op = rng.integers(0, 3)
                pos = int(rng.integers(0, max(1, len(chars))))
                if op == 0 and chars:
                    del chars[pos % len(chars)]
                elif op == 1:
                    chars.insert(pos, chr(int(rng.integers(1, 1000))))
                elif chars:
                    chars[pos % len(chars)] = "\t"
            path = tmp_path / f"fuzz{trial}.tsv"
            path.write_text("".join(chars) + "\n", encoding="utf-8")
            loader = loaders[int(rng.integers(0, len(loaders)))]
            try:
                loader(path)
            except ShotSearchError:
                pass  # structured failure is the contract

    def test_binary_format_fuzz(self, tmp_path):
        rng = np.random.default_rng(7)
        shots, keyframes = make_shots(2)
        good_path = tmp_path / "good.shgc"
        write_codes(good_path, CodeSpace.SEMANTIC, make_code_records(keyframes))
        blob = bytearray(good_path.read_bytes())
        for trial in range(150):
            mutated = bytearray(blob)
            op = int(rng.integers(0, 3))
            if op == 0:  # flip random bytes
                for _ in range(int(rng.integers(1, 8))):
                    mutated[int(rng.integers(0, len(mutated)))] = int(rng.integers(0, 256))
            elif op == 1:  # truncate
                mutated = mutated[: int(rng.integers(0, len(mutated)))]
            else:  # append garbage
                mutated.extend(rng.bytes(int(rng.integers(1, 64))))
            path = tmp_path / f"fuzz{trial}.shgc"
            path.write_bytes(bytes(mutated))
            try:
                load_codes(path, CodeSpace.SEMANTIC, keyframes)
            except ShotSearchError:
                pass

    def test_random_bytes_never_crash_loaders(self, tmp_path):
        rng = np.random.default_rng(13)
        shots, keyframes = make_shots(1)
        for trial in range(60):
            path = tmp_path / f"junk{trial}"
            path.write_bytes(rng.bytes(int(rng.integers(0, 200))))
            for loader in (
                lambda p: load_codes(p, CodeSpace.SEMANTIC, keyframes),
                lambda p: load_manifest(p),
                lambda p: load_annotations(p, shots),
                lambda p: load_text(p, shots),
            ):
                try:
                    loader(path)
                except ShotSearchError:
                    pass
