"""Fixed-delay playout buffer with simple loss concealment."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .codec import CompandingLaw
from .packetizer import SEQ_MOD
from .transport import DeliveredPacket


class Concealment(enum.Enum):
    SILENCE_FILL = "silence"
    REPEAT_LAST = "repeat"

    @classmethod
    def parse(cls, name) -> "Concealment":
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("-", "").replace("_", "")
        for member, aliases in ((cls.SILENCE_FILL, ("silence", "silencefill")),
                                (cls.REPEAT_LAST, ("repeat", "repeatlast"))):
            if key in aliases:
                return member
        raise ValueError(f"unknown concealment {name!r}")


class FrameOrigin(enum.Enum):
    RECEIVED = "received"
    CONCEALED = "concealed"


@dataclass(frozen=True)
class PlayoutConfig:
    playout_delay_ms: float = 60.0
    concealment: Concealment = Concealment.REPEAT_LAST

    def __post_init__(self):
        if self.playout_delay_ms < 0:
            raise ValueError("playout delay must be non-negative")
        object.__setattr__(self, "concealment", Concealment.parse(self.concealment))


@dataclass(frozen=True)
class PlayoutFrame:
    payload: bytes
    origin: FrameOrigin
    sequence: int


def seq_diff(a: int, b: int) -> int:
    """Signed distance ``a - b`` in sequence space, within +/- 2**15."""
    return ((a - b + SEQ_MOD // 2) % SEQ_MOD) - SEQ_MOD // 2


class StreamMismatch(ValueError):
    pass


class JitterBuffer:
    """Reorders packets by sequence number and hands out one frame per tick.

    Single producer, single consumer; no internal locking.
    """

    def __init__(self, stream_id: int, frame_samples: int = 160, law=CompandingLaw.MULAW,
                 cfg: PlayoutConfig = PlayoutConfig(), initial_seq: int | None = None):
        self.stream_id = stream_id
        self.frame_samples = frame_samples
        self.law = CompandingLaw.parse(law)
        self.cfg = cfg
        self.next_seq = None if initial_seq is None else initial_seq % SEQ_MOD
        self._store: dict[int, bytes] = {}
        self._last = bytes([self.law.silence]) * frame_samples
        self.pushed = 0
        self.duplicates = 0
        self.late = 0
        self.received_frames = 0
        self.concealed_frames = 0

    def push(self, dp: DeliveredPacket) -> None:
        p = dp.packet
        if p.stream_id != self.stream_id:
            raise StreamMismatch(f"packet stream {p.stream_id:#x} != buffer stream {self.stream_id:#x}")
        seq = p.sequence
        if self.next_seq is not None and seq_diff(seq, self.next_seq) < 0:
            self.late += 1
            return
        if seq in self._store:
            self.duplicates += 1
            return
        self._store[seq] = p.payload
        self.pushed += 1

    def __len__(self):
        return len(self._store)

    def pop_frame(self, playout_time_ms: float | None = None) -> PlayoutFrame:
        """Next frame in sequence order, concealed when its packet is missing.

        ``playout_time_ms`` is accepted for symmetry with a real playout
        clock; scheduling is the caller's job (see :func:`run_playout`).
        """
        if self.next_seq is None:
            if not self._store:
                raise LookupError("nothing buffered and no initial sequence known")
            self.next_seq = self._oldest()
        seq = self.next_seq
        payload = self._store.pop(seq, None)
        if payload is not None:
            frame = PlayoutFrame(payload, FrameOrigin.RECEIVED, seq)
            self.received_frames += 1
            self._last = payload
        else:
            if self.cfg.concealment is Concealment.REPEAT_LAST:
                data = self._last
            else:
                data = bytes([self.law.silence]) * self.frame_samples
            frame = PlayoutFrame(data, FrameOrigin.CONCEALED, seq)
            self.concealed_frames += 1
        self.next_seq = (seq + 1) % SEQ_MOD
        return frame

    def _oldest(self) -> int:
        keys = list(self._store)
        ref = keys[0]
        return min(keys, key=lambda s: seq_diff(s, ref))

    def newest(self) -> int | None:
        if not self._store:
            return None
        keys = list(self._store)
        ref = keys[0]
        return max(keys, key=lambda s: seq_diff(s, ref))


def run_playout(delivered, frame_samples: int = 160, law=CompandingLaw.MULAW,
                cfg: PlayoutConfig = PlayoutConfig(), frame_ms: float = 20.0,
                initial_seq: int | None = None, frame_count: int | None = None):
    """Drive a :class:`JitterBuffer` from timed arrivals.

    The playout clock starts at the first arrival plus the playout delay and
    advances ``frame_ms`` per frame; before each frame every packet that has
    arrived by then is pushed. Without ``frame_count`` playout stops once
    the newest packet seen has been played.

    Returns ``(frames, buffer)``.
    """
    arrivals = sorted(delivered, key=lambda d: d.arrival_time_ms)
    if not arrivals:
        return [], None
    buf = JitterBuffer(arrivals[0].packet.stream_id, frame_samples, law, cfg, initial_seq)
    clock = arrivals[0].arrival_time_ms + cfg.playout_delay_ms
    i = 0
    frames = []
    last_seen = None
    while True:
        while i < len(arrivals) and arrivals[i].arrival_time_ms <= clock:
            seq = arrivals[i].packet.sequence
            if last_seen is None or seq_diff(seq, last_seen) > 0:
                last_seen = seq
            buf.push(arrivals[i])
            i += 1
        if frame_count is not None:
            if len(frames) >= frame_count:
                break
        elif i >= len(arrivals) and buf.next_seq is not None and seq_diff(buf.next_seq, last_seen) > 0:
            break
        frames.append(buf.pop_frame(clock))
        clock += frame_ms
    # packets still in flight when playout ended count as late
    buf.late += len(arrivals) - i
    return frames, buf
