"""Mono 16-bit PCM audio: WAV I/O, test tones and the pre-codec gain stage."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PCM_MIN = -32768
PCM_MAX = 32767
FULL_SCALE = 32767

_WAVE_FORMAT_PCM = 1
_HEADER = struct.Struct("<4sI4s4sIHHIIHH4sI")


class WavError(ValueError):
    """Raised for WAV files this package cannot or will not read."""


@dataclass(frozen=True, eq=False)
class AudioSignal:
    """Mono PCM audio. ``samples`` is a read-only int16 array."""

    sample_rate_hz: int
    samples: np.ndarray

    def __post_init__(self):
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz <= 0:
            raise ValueError(f"sample rate must be a positive integer, got {self.sample_rate_hz}")
        arr = np.asarray(self.samples)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional (mono)")
        if arr.dtype != np.int16:
            if arr.size and (arr.min() < PCM_MIN or arr.max() > PCM_MAX):
                raise ValueError("sample values outside the 16-bit range")
            if arr.size and not np.all(np.asarray(arr) == np.round(arr)):
                raise ValueError("samples must be integers")
            arr = arr.astype(np.int16)
        else:
            arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))
        object.__setattr__(self, "samples", arr)

    channel_count = 1

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def __len__(self):
        return len(self.samples)

    def __eq__(self, other):
        if not isinstance(other, AudioSignal):
            return NotImplemented
        return (self.sample_rate_hz == other.sample_rate_hz
                and np.array_equal(self.samples, other.samples))

    def __repr__(self):
        return f"AudioSignal({self.sample_rate_hz} Hz, {len(self.samples)} samples)"


def read_wav(path) -> AudioSignal:
    """Read a mono 16-bit PCM RIFF/WAVE file.

    Chunks other than ``fmt `` and ``data`` are skipped, so files with LIST
    or fact chunks load fine. Anything that is not mono 16-bit integer PCM
    raises :class:`WavError`.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    pcm = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise WavError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body)
        elif chunk_id == b"data":
            if len(body) < size:
                raise WavError(f"{path}: data chunk truncated")
            pcm = body
        pos += 8 + size + (size & 1)

    if fmt is None:
        raise WavError(f"{path}: missing fmt chunk")
    if pcm is None:
        raise WavError(f"{path}: missing data chunk")

    format_tag, channels, rate, _byte_rate, _align, bits = fmt
    if format_tag != _WAVE_FORMAT_PCM:
        raise WavError(f"{path}: unsupported encoding (format tag {format_tag})")
    if bits != 16:
        raise WavError(f"{path}: unsupported bit depth {bits}")
    if channels != 1:
        raise WavError(f"{path}: unsupported channel count {channels}")
    if rate <= 0:
        raise WavError(f"{path}: invalid sample rate {rate}")
    if len(pcm) % 2:
        raise WavError(f"{path}: odd-length data chunk")

    samples = np.frombuffer(pcm, dtype="<i2").astype(np.int16)
    return AudioSignal(rate, samples)


def wav_bytes(signal: AudioSignal) -> bytes:
    """Canonical 44-byte-header WAV encoding of ``signal``."""
    if len(signal) == 0:
        raise ValueError("cannot write an empty signal")
    pcm = signal.samples.astype("<i2").tobytes()
    header = _HEADER.pack(
        b"RIFF", 36 + len(pcm), b"WAVE",
        b"fmt ", 16, _WAVE_FORMAT_PCM, 1,
        signal.sample_rate_hz, signal.sample_rate_hz * 2, 2, 16,
        b"data", len(pcm),
    )
    return header + pcm


def write_wav(signal: AudioSignal, path) -> None:
    Path(path).write_bytes(wav_bytes(signal))


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def apply_gain(signal: AudioSignal, gain: float) -> AudioSignal:
    """Scale by ``gain``, rounding half away from zero and saturating to int16."""
    if not gain >= 0:
        raise ValueError(f"gain must be non-negative, got {gain}")
    scaled = _round_half_away(signal.samples.astype(np.float64) * gain)
    out = np.clip(scaled, PCM_MIN, PCM_MAX).astype(np.int16)
    return AudioSignal(signal.sample_rate_hz, out)


def generate_tone(freq_hz: float, duration_s: float, amplitude: float,
                  sample_rate_hz: int = 8000) -> AudioSignal:
    """Sine tone ``round(amplitude * 32767 * sin(2*pi*f*n/fs))``."""
    if not 0 < freq_hz < sample_rate_hz / 2:
        raise ValueError(f"frequency {freq_hz} Hz must lie strictly between 0 and Nyquist")
    if not 0 <= amplitude <= 1:
        raise ValueError(f"amplitude must be in [0, 1], got {amplitude}")
    if duration_s < 0:
        raise ValueError("duration must be non-negative")
    n_samples = int(round(duration_s * sample_rate_hz))
    n = np.arange(n_samples)
    wave = amplitude * FULL_SCALE * np.sin(2 * math.pi * freq_hz * n / sample_rate_hz)
    return AudioSignal(sample_rate_hz, _round_half_away(wave).astype(np.int16))
