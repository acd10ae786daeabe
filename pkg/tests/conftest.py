import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion covered by this test"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        _ACCEPTANCE_RESULTS.append((marker.args[0], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}: {name}")

from shotsearch.model import CodeSpace, Keyframe, ShotRef, derive_keyframes
from shotsearch.store import CodeStore, KeyframeTable


def make_shots(n_shots, videos=2, frames_per_shot=100):
    """n_shots ShotRefs spread over `videos` video ids, with derived keyframes."""
    shots = []
    keyframes = []
    per_video = -(-n_shots // videos)
    for i in range(n_shots):
        video_id = f"v{i // per_video:03d}"
        idx = i % per_video
        start = idx * frames_per_shot
        shot = ShotRef(video_id, idx, start, start + frames_per_shot - 1)
        shots.append(shot)
        keyframes.extend(derive_keyframes(shot))
    return shots, keyframes


def random_store(n_shots, seed, space=CodeSpace.SEMANTIC, table=None):
    """A CodeStore over n_shots * 5 random codes."""
    if table is None:
        shots, keyframes = make_shots(n_shots)
        table = KeyframeTable.from_tables(shots, keyframes)
    rng = np.random.default_rng(seed)
    n = table.n_keyframes
    words64 = rng.integers(0, 2**64, size=n, dtype=np.uint64)
    words256 = rng.integers(0, 2**64, size=(n, 4), dtype=np.uint64)
    return CodeStore(table, space, words64, words256)


@pytest.fixture
def small_table():
    shots, keyframes = make_shots(20)
    return KeyframeTable.from_tables(shots, keyframes)
