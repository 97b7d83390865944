"""Transport and reconstruction quality metrics for a finished run."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .audio_io import AudioSignal

INFINITE = "infinite"


@dataclass(frozen=True)
class DelayStats:
    min: float
    mean: float
    max: float
    p95: float


@dataclass(frozen=True)
class QosReport:
    sent_count: int
    received_count: int
    late_count: int
    concealed_count: int
    loss_rate: float
    delay_ms: DelayStats | None
    interarrival_jitter_ms: float | None
    snr_db: float | None

    def __post_init__(self):
        if self.received_count > self.sent_count:
            raise ValueError("received_count exceeds sent_count")

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.snr_db is not None and math.isinf(self.snr_db):
            d["snr_db"] = INFINITE
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "QosReport":
        d = dict(d)
        if d.get("delay_ms") is not None:
            d["delay_ms"] = DelayStats(**d["delay_ms"])
        if d.get("snr_db") == INFINITE:
            d["snr_db"] = math.inf
        return cls(**d)


QOS_REPORT_SCHEMA = {
    "type": "object",
    "required": ["sent_count", "received_count", "late_count", "concealed_count",
                 "loss_rate", "delay_ms", "interarrival_jitter_ms", "snr_db"],
    "additionalProperties": False,
    "properties": {
        "sent_count": {"type": "integer", "minimum": 0},
        "received_count": {"type": "integer", "minimum": 0},
        "late_count": {"type": "integer", "minimum": 0},
        "concealed_count": {"type": "integer", "minimum": 0},
        "loss_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "delay_ms": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["min", "mean", "max", "p95"],
                    "additionalProperties": False,
                    "properties": {k: {"type": "number", "minimum": 0}
                                   for k in ("min", "mean", "max", "p95")},
                },
            ]
        },
        "interarrival_jitter_ms": {"type": ["number", "null"], "minimum": 0},
        "snr_db": {"oneOf": [{"type": "number"}, {"const": INFINITE}, {"type": "null"}]},
    },
}


def loss_rate(sent_count: int, delivered) -> float:
    if sent_count <= 0:
        raise ValueError("sent_count must be positive")
    n = len(delivered)
    if n > sent_count:
        raise ValueError(f"{n} delivered packets but only {sent_count} sent")
    # same as 1 - n/sent, but exact when compared with a drop tally
    return (sent_count - n) / sent_count


def jitter_series(delivered, clock_hz: int = 8000) -> np.ndarray:
    """Per-packet ``|D(i-1, i)|`` in ms, in arrival order.

    D compares the arrival spacing with the media timestamp spacing; the
    timestamp difference is taken modulo 2**32 as a signed value.
    """
    pkts = list(delivered)
    if len(pkts) < 2:
        raise ValueError("need at least two packets to measure jitter")
    arrival = np.array([d.arrival_time_ms for d in pkts])
    ts = np.array([d.packet.timestamp for d in pkts], dtype=np.int64)
    dts = ((np.diff(ts) + 2**31) % 2**32) - 2**31
    return np.abs(np.diff(arrival) - dts * 1000.0 / clock_hz)


def jitter_trajectory(delivered, clock_hz: int = 8000) -> np.ndarray:
    """Running jitter estimate after each packet, ``J += (|D| - J) / 16``."""
    series = jitter_series(delivered, clock_hz)
    out = np.empty(series.size)
    j = 0.0
    for i, d in enumerate(series):
        j += (d - j) / 16.0
        out[i] = j
    return out


def interarrival_jitter(delivered, clock_hz: int = 8000) -> float:
    """Final value of the smoothed interarrival jitter estimate, in ms."""
    return float(jitter_trajectory(delivered, clock_hz)[-1])


def delay_stats(delivered) -> DelayStats:
    delays = np.array([d.arrival_time_ms - d.send_time_ms for d in delivered], dtype=np.float64)
    if delays.size == 0:
        raise ValueError("no delivered packets")
    ordered = np.sort(delays)
    rank = math.ceil(0.95 * ordered.size)
    return DelayStats(float(ordered[0]), float(delays.mean()), float(ordered[-1]),
                      float(ordered[rank - 1]))


def reconstruction_snr(original: AudioSignal, received: AudioSignal, alignment_offset: int = 0) -> float:
    """SNR in dB of ``received`` against ``original``.

    A positive ``alignment_offset`` means ``received`` lags: sample n of the
    original is compared with sample n + offset of the received signal.
    Returns ``math.inf`` when the two agree exactly over the overlap.
    """
    if original.sample_rate_hz != received.sample_rate_hz:
        raise ValueError("sample rates differ")
    s = original.samples.astype(np.float64)
    r = received.samples.astype(np.float64)
    if alignment_offset >= 0:
        r = r[alignment_offset:]
    else:
        s = s[-alignment_offset:]
    n = min(s.size, r.size)
    if n < original.sample_rate_hz:
        raise ValueError(f"overlap of {n} samples is shorter than one second")
    s, r = s[:n], r[:n]
    noise = np.sum((s - r) ** 2)
    if noise == 0:
        return math.inf
    return float(10.0 * np.log10(np.sum(s**2) / noise))
