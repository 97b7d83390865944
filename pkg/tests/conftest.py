import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from voipkit import AudioSignal, generate_tone, write_wav


@pytest.fixture
def tone_1k():
    return generate_tone(1000.0, 1.0, 0.5, 8000)


@pytest.fixture
def tone_wav(tmp_path, tone_1k):
    path = tmp_path / "tone.wav"
    write_wav(tone_1k, path)
    return path


@pytest.fixture
def noise_signal():
    rng = np.random.default_rng(1234)
    return AudioSignal(8000, rng.integers(-20000, 20000, size=8000, dtype=np.int16))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in RESULTS:
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}{suffix}")
