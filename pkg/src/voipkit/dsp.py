"""Spectral analysis: spectrum, periodogram, Welch PSD, spectrogram, and
spectra of packet byte streams.

All spectra are one-sided with ``n_fft // 2 + 1`` bins at ``k * fs / n_fft``.
PCM input is normalized by 1/32768 before any transform. Every function also
takes an already-normalized float array together with ``fs``.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioSignal
from .packetizer import serialize_packet


class Window(enum.Enum):
    RECTANGULAR = "rectangular"
    HANN = "hann"

    @classmethod
    def parse(cls, name) -> "Window":
        if isinstance(name, cls):
            return name
        key = str(name).lower()
        if key in ("rect", "rectangular", "boxcar"):
            return cls.RECTANGULAR
        if key in ("hann", "hanning"):
            return cls.HANN
        raise ValueError(f"unknown window {name!r}")


class Normalization(enum.Enum):
    PER_BIN_POWER = "per_bin_power"
    DENSITY = "density"


@dataclass(frozen=True, eq=False)
class SpectralResult:
    freqs_hz: np.ndarray
    power: np.ndarray
    n_fft: int
    normalization: Normalization

    def argmax_bin(self) -> int:
        return int(np.argmax(self.power))

    def total_power(self) -> float:
        """Sum of power, times the bin width for densities."""
        if self.normalization is Normalization.DENSITY:
            return float(self.power.sum() * (self.freqs_hz[1] - self.freqs_hz[0]))
        return float(self.power.sum())


@dataclass(frozen=True, eq=False)
class Spectrogram:
    times_s: np.ndarray
    freqs_hz: np.ndarray
    power: np.ndarray
    window_len: int
    hop: int


# -- transform ---------------------------------------------------------------

def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft(x) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT.

    Works along the last axis, so a 2-D array transforms row by row.
    """
    a = np.asarray(x, dtype=np.complex128)
    n = a.shape[-1]
    if not is_power_of_two(n):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    a = a[..., _bit_reverse_indices(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(*a.shape[:-1], n // size, size)
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        a = np.concatenate([even + odd, even - odd], axis=-1).reshape(*a.shape[:-1], n)
        size *= 2
    return a


def _one_sided(mag2: np.ndarray, n_fft: int) -> np.ndarray:
    out = mag2[..., : n_fft // 2 + 1].copy()
    out[..., 1 : n_fft // 2] *= 2.0
    return out


def _freqs(n_fft: int, fs: float) -> np.ndarray:
    return np.arange(n_fft // 2 + 1) * (fs / n_fft)


# -- inputs ------------------------------------------------------------------

def _as_float(signal, fs=None) -> tuple[np.ndarray, float]:
    if isinstance(signal, AudioSignal):
        return signal.samples.astype(np.float64) / 32768.0, float(signal.sample_rate_hz)
    if fs is None:
        raise TypeError("fs is required for raw arrays")
    return np.asarray(signal, dtype=np.float64), float(fs)


def _check_n_fft(n_fft: int) -> None:
    if not is_power_of_two(n_fft) or n_fft < 16:
        raise ValueError(f"n_fft must be a power of two >= 16, got {n_fft}")


def window_values(window, length: int) -> np.ndarray:
    """Periodic window of ``length`` points (the usual choice for spectral
    estimation, and what the overlap-add identity assumes)."""
    window = Window.parse(window)
    if window is Window.RECTANGULAR:
        return np.ones(length)
    n = np.arange(length)
    return 0.5 - 0.5 * np.cos(2 * np.pi * n / length)


# -- estimators --------------------------------------------------------------

def spectrum(signal, n_fft: int = 1024, fs=None) -> SpectralResult:
    """Per-bin power ``|X_k|^2 / n_fft^2`` of the first ``n_fft`` samples,
    with interior bins doubled."""
    _check_n_fft(n_fft)
    x, fs = _as_float(signal, fs)
    if x.size == 0:
        raise ValueError("empty signal")
    seg = np.zeros(n_fft)
    m = min(n_fft, x.size)
    seg[:m] = x[:m]
    power = _one_sided(np.abs(fft(seg)) ** 2, n_fft) / n_fft**2
    return SpectralResult(_freqs(n_fft, fs), power, n_fft, Normalization.PER_BIN_POWER)


def _periodogram_rows(frames: np.ndarray, win: np.ndarray, n_fft: int, fs: float) -> np.ndarray:
    padded = np.zeros((frames.shape[0], n_fft))
    padded[:, : frames.shape[1]] = frames * win
    mag2 = np.abs(fft(padded)) ** 2
    return _one_sided(mag2, n_fft) / (fs * np.sum(win**2))


def periodogram(signal, window=Window.HANN, n_fft: int = 1024, fs=None) -> SpectralResult:
    """Density-scaled periodogram of the first ``min(len, n_fft)`` samples.

    The window spans the analyzed segment; shorter signals are zero-padded
    after windowing.
    """
    _check_n_fft(n_fft)
    x, fs = _as_float(signal, fs)
    if x.size == 0:
        raise ValueError("empty signal")
    seg = x[:n_fft]
    win = window_values(window, seg.size)
    power = _periodogram_rows(seg[None, :], win, n_fft, fs)[0]
    return SpectralResult(_freqs(n_fft, fs), power, n_fft, Normalization.DENSITY)


def _frames(x: np.ndarray, window_len: int, hop: int) -> np.ndarray:
    count = (x.size - window_len) // hop + 1
    idx = np.arange(window_len)[None, :] + hop * np.arange(count)[:, None]
    return x[idx]


def welch_psd(signal, window_len: int = 256, overlap_fraction: float = 0.5,
              window=Window.HANN, fs=None, n_fft: int | None = None) -> SpectralResult:
    """Average of density periodograms over overlapping segments."""
    x, fs = _as_float(signal, fs)
    if not 0 <= overlap_fraction < 1:
        raise ValueError("overlap_fraction must be in [0, 1)")
    if window_len <= 0 or window_len > x.size:
        raise ValueError(f"segment length {window_len} exceeds signal length {x.size}")
    n_fft = n_fft or max(16, next_power_of_two(window_len))
    _check_n_fft(n_fft)
    if n_fft < window_len:
        raise ValueError("n_fft shorter than the segment")
    hop = max(1, window_len - int(round(overlap_fraction * window_len)))
    win = window_values(window, window_len)
    rows = _periodogram_rows(_frames(x, window_len, hop), win, n_fft, fs)
    return SpectralResult(_freqs(n_fft, fs), rows.mean(axis=0), n_fft, Normalization.DENSITY)


def spectrogram(signal, window_len: int = 256, hop: int = 128, window=Window.HANN,
                fs=None, n_fft: int | None = None) -> Spectrogram:
    x, fs = _as_float(signal, fs)
    if not 0 < hop <= window_len <= x.size:
        raise ValueError(f"need 0 < hop <= window_len <= len(signal); got hop={hop}, "
                         f"window_len={window_len}, len={x.size}")
    n_fft = n_fft or max(16, next_power_of_two(window_len))
    _check_n_fft(n_fft)
    win = window_values(window, window_len)
    rows = _periodogram_rows(_frames(x, window_len, hop), win, n_fft, fs)
    times = (np.arange(rows.shape[0]) * hop + window_len / 2) / fs
    return Spectrogram(times, _freqs(n_fft, fs), rows, window_len, hop)


def byte_stream_spectrum(data: bytes, n_fft: int, byte_rate_hz: float) -> SpectralResult:
    """Spectrum of bytes mapped to ``(b - 127.5) / 127.5``."""
    if not data:
        raise ValueError("empty byte stream")
    x = (np.frombuffer(bytes(data), dtype=np.uint8).astype(np.float64) - 127.5) / 127.5
    return spectrum(x, n_fft, fs=byte_rate_hz)


def packed_spectrum(packets, n_fft: int = 1024, codec_rate_hz: int = 8000) -> SpectralResult:
    """Spectrum of the serialized wire bytes of ``packets``.

    The byte rate is the wire rate of the stream: wire bytes per packet
    divided by the packet's media duration.
    """
    packets = list(packets)
    if not packets:
        raise ValueError("no packets")
    wire = b"".join(serialize_packet(p) for p in packets)
    media_samples = sum(len(p.payload) for p in packets)
    byte_rate = len(wire) * codec_rate_hz / media_samples
    return byte_stream_spectrum(wire, n_fft, byte_rate)


# -- export ------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def write_spectrum_csv(result: SpectralResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "power"])
        for f, p in zip(result.freqs_hz, result.power):
            w.writerow([_fmt(f), _fmt(p)])


def write_spectrogram_csv(result: Spectrogram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "freq_hz", "power"])
        for t, row in zip(result.times_s, result.power):
            for f, p in zip(result.freqs_hz, row):
                w.writerow([_fmt(t), _fmt(f), _fmt(p)])


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def spectrum_to_json(result: SpectralResult) -> str:
    return json.dumps({
        "n_fft": result.n_fft,
        "normalization": result.normalization.value,
        "freqs_hz": result.freqs_hz.tolist(),
        "power": result.power.tolist(),
    })


def write_spectrum_json(result: SpectralResult, path) -> None:
    Path(path).write_text(spectrum_to_json(result))
