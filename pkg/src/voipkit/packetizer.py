"""RTP-compatible framing of G.711 codeword streams.

Wire layout (12-byte header, big-endian)::

    byte 0      0x80  version 2, no padding / extension / CSRC
    byte 1      payload type (0 PCMU, 8 PCMA), marker bit clear
    bytes 2-3   sequence number
    bytes 4-7   timestamp, in samples of the 8 kHz codec clock
    bytes 8-11  stream id (RTP SSRC)
    bytes 12-   payload, one codeword per sample
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .codec import CompandingLaw

RTP_VERSION = 2
HEADER_SIZE = 12
_HEADER = struct.Struct("!BBHII")

SEQ_MOD = 1 << 16
TS_MOD = 1 << 32


class PacketError(ValueError):
    pass


@dataclass(frozen=True)
class FrameConfig:
    frame_ms: int = 20
    sample_rate_hz: int = 8000

    def __post_init__(self):
        if self.frame_ms <= 0 or int(self.frame_ms) != self.frame_ms:
            raise ValueError(f"frame_ms must be a positive integer, got {self.frame_ms}")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")
        if (self.sample_rate_hz * self.frame_ms) % 1000:
            raise ValueError(
                f"{self.frame_ms} ms at {self.sample_rate_hz} Hz is not a whole number of samples")

    @property
    def frame_samples(self) -> int:
        return self.sample_rate_hz * self.frame_ms // 1000


@dataclass(frozen=True)
class PacketHeader:
    payload_type: int
    sequence: int
    timestamp: int
    stream_id: int
    version: int = RTP_VERSION

    @property
    def law(self) -> CompandingLaw:
        return CompandingLaw.from_payload_type(self.payload_type)


@dataclass(frozen=True)
class VoipPacket:
    header: PacketHeader
    payload: bytes

    @property
    def sequence(self) -> int:
        return self.header.sequence

    @property
    def timestamp(self) -> int:
        return self.header.timestamp

    @property
    def stream_id(self) -> int:
        return self.header.stream_id

    @property
    def law(self) -> CompandingLaw:
        return self.header.law


class Packetizer:
    """Stateful packet numbering for one outgoing stream.

    Successive calls to :meth:`packetize` continue the sequence and
    timestamp counters, so one instance models one sending session.
    """

    def __init__(self, cfg: FrameConfig = FrameConfig(), law=CompandingLaw.MULAW,
                 initial_seq: int = 0, initial_ts: int = 0, stream_id: int = 0):
        self.cfg = cfg
        self.law = CompandingLaw.parse(law)
        self.next_seq = initial_seq % SEQ_MOD
        self.next_ts = initial_ts % TS_MOD
        if not 0 <= stream_id < TS_MOD:
            raise ValueError("stream_id must fit in 32 bits")
        self.stream_id = stream_id

    def packetize(self, payload_stream: bytes) -> list[VoipPacket]:
        if not payload_stream:
            raise PacketError("cannot packetize an empty stream")
        n = self.cfg.frame_samples
        data = bytes(payload_stream)
        tail = len(data) % n
        if tail:
            data += bytes([self.law.silence]) * (n - tail)
        packets = []
        for start in range(0, len(data), n):
            header = PacketHeader(self.law.payload_type, self.next_seq, self.next_ts, self.stream_id)
            packets.append(VoipPacket(header, data[start:start + n]))
            self.next_seq = (self.next_seq + 1) % SEQ_MOD
            self.next_ts = (self.next_ts + n) % TS_MOD
        return packets


def packetize(payload_stream: bytes, cfg: FrameConfig = FrameConfig(), law=CompandingLaw.MULAW,
              initial_seq: int = 0, initial_ts: int = 0, stream_id: int = 0) -> list[VoipPacket]:
    """Split a codeword stream into frame-sized packets.

    The last frame is padded with the law's silence codeword.
    """
    return Packetizer(cfg, law, initial_seq, initial_ts, stream_id).packetize(payload_stream)


def serialize_packet(p: VoipPacket) -> bytes:
    h = p.header
    first = (h.version << 6) & 0xC0
    return _HEADER.pack(first, h.payload_type & 0x7F, h.sequence, h.timestamp, h.stream_id) + p.payload


def parse_packet(wire: bytes) -> VoipPacket:
    if len(wire) < HEADER_SIZE + 1:
        raise PacketError(f"truncated packet ({len(wire)} bytes)")
    first, second, seq, ts, ssrc = _HEADER.unpack_from(wire)
    version = first >> 6
    if version != RTP_VERSION:
        raise PacketError(f"bad version {version}")
    pt = second & 0x7F
    if pt not in (0, 8):
        raise PacketError(f"unknown payload type {pt}")
    return VoipPacket(PacketHeader(pt, seq, ts, ssrc, version), bytes(wire[HEADER_SIZE:]))


def depacketize(packets) -> bytes:
    """Concatenate payloads of packets already in sequence order."""
    return b"".join(p.payload for p in packets)
