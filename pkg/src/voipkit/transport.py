"""Packet transport: real UDP sockets and a seeded impairment channel.

Both paths produce :class:`DeliveredPacket` lists so everything downstream
(jitter buffer, QoS metrics) does not care which one carried the packets.
"""

from __future__ import annotations

import logging
import socket
import time
from dataclasses import dataclass, field

import numpy as np

from .packetizer import PacketError, VoipPacket, parse_packet, serialize_packet

log = logging.getLogger(__name__)

DEFAULT_PORT = 9714
_MAX_DATAGRAM = 65535


class TransportError(OSError):
    pass


@dataclass(frozen=True)
class ChannelConfig:
    """Impairments of the simulated channel.

    ``jitter_ms`` is the width of the uniform extra delay added on top of
    ``base_delay_ms``; reordering happens whenever that extra delay exceeds
    the packet spacing.
    """

    loss_prob: float = 0.0
    base_delay_ms: float = 0.0
    jitter_ms: float = 0.0
    seed: int = 0
    jitter_distribution: str = "uniform"

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError(f"loss_prob must be in [0, 1], got {self.loss_prob}")
        if self.base_delay_ms < 0 or self.jitter_ms < 0:
            raise ValueError("delays must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.jitter_distribution != "uniform":
            raise ValueError(f"unsupported jitter distribution {self.jitter_distribution!r}")


@dataclass(frozen=True)
class DeliveredPacket:
    packet: VoipPacket
    send_time_ms: float
    arrival_time_ms: float

    @property
    def delay_ms(self) -> float:
        return self.arrival_time_ms - self.send_time_ms


class SimulatedChannel:
    """Bernoulli loss plus uniform delay jitter, reproducible from the seed.

    ``sent`` and ``dropped`` tally every packet offered to :meth:`transmit`.
    """

    def __init__(self, cfg: ChannelConfig = ChannelConfig()):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.sent = 0
        self.dropped = 0

    def transmit(self, packets, frame_ms: float = 20.0) -> list[DeliveredPacket]:
        packets = list(packets)
        n = len(packets)
        # both draws happen for every packet so the jitter sequence does not
        # depend on which packets were lost
        drop = self.rng.random(n) < self.cfg.loss_prob
        extra = self.rng.random(n) * self.cfg.jitter_ms
        delivered = []
        for i, p in enumerate(packets):
            if drop[i]:
                continue
            send = (self.sent + i) * frame_ms
            delivered.append(DeliveredPacket(p, send, send + self.cfg.base_delay_ms + float(extra[i])))
        self.sent += n
        self.dropped += int(drop.sum())
        # stable sort: ties keep send order, i.e. sequence order
        delivered.sort(key=lambda d: d.arrival_time_ms)
        return delivered


def simulate_channel(packets, cfg: ChannelConfig = ChannelConfig(),
                     frame_ms: float = 20.0) -> list[DeliveredPacket]:
    return SimulatedChannel(cfg).transmit(packets, frame_ms)


def parse_endpoint(destination, default_port: int = DEFAULT_PORT) -> tuple[str, int]:
    """Split ``host:port`` (``[v6addr]:port`` for IPv6) into a tuple."""
    if isinstance(destination, tuple):
        return destination[0], int(destination[1])
    text = str(destination)
    if text.startswith("["):
        host, _, rest = text[1:].partition("]")
        port = rest.lstrip(":") or default_port
    elif text.count(":") == 1:
        host, port = text.split(":")
    else:
        host, port = text, default_port
    return host, int(port)


def _resolve(host: str, port: int, passive: bool = False):
    flags = socket.AI_PASSIVE if passive else 0
    try:
        infos = socket.getaddrinfo(host or None, port, socket.AF_UNSPEC, socket.SOCK_DGRAM, 0, flags)
    except socket.gaierror as exc:
        raise TransportError(f"cannot resolve {host!r}: {exc}") from exc
    return infos[0]


@dataclass
class SendReport:
    count: int
    send_times_ms: list[float]
    bytes_sent: int
    destination: str

    def to_dict(self) -> dict:
        return {
            "sent_count": self.count,
            "bytes_sent": self.bytes_sent,
            "destination": self.destination,
            "send_times_ms": self.send_times_ms,
        }


def send_udp(packets, destination, pacing_ms: float = 20.0) -> SendReport:
    """Send one datagram per packet, ``pacing_ms`` apart on a fixed schedule.

    Send times are milliseconds on the monotonic clock relative to the
    first datagram.
    """
    if pacing_ms < 0:
        raise ValueError("pacing_ms must be non-negative")
    host, port = parse_endpoint(destination)
    family, socktype, proto, _, addr = _resolve(host, port)
    times = []
    total = 0
    try:
        sock = socket.socket(family, socktype, proto)
    except OSError as exc:
        raise TransportError(f"cannot open socket: {exc}") from exc
    with sock:
        t0 = time.monotonic()
        for i, p in enumerate(packets):
            due = t0 + i * pacing_ms / 1000.0
            wait = due - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            wire = serialize_packet(p)
            try:
                sock.sendto(wire, addr)
            except OSError as exc:
                raise TransportError(f"send to {host}:{port} failed: {exc}") from exc
            times.append((time.monotonic() - t0) * 1000.0)
            total += len(wire)
    return SendReport(len(times), times, total, f"{host}:{port}")


@dataclass
class ReceiveResult:
    packets: list[DeliveredPacket] = field(default_factory=list)
    malformed: int = 0

    def __len__(self):
        return len(self.packets)

    def __iter__(self):
        return iter(self.packets)


class UdpReceiver:
    """Bound UDP socket. Binding happens in the constructor so a test can
    start the sender only after the port is known to be listening."""

    def __init__(self, listen_port: int = DEFAULT_PORT, host: str = ""):
        family, socktype, proto, _, addr = _resolve(host, listen_port, passive=True)
        try:
            self.sock = socket.socket(family, socktype, proto)
            if family == socket.AF_INET6 and not host:
                self.sock.setsockopt(socket.IPPROTO_IPV6, socket.IPV6_V6ONLY, 0)
            self.sock.bind(addr)
        except OSError as exc:
            raise TransportError(f"cannot bind UDP port {listen_port}: {exc}") from exc
        self.port = self.sock.getsockname()[1]

    def receive(self, idle_timeout_ms: float = 1000.0) -> ReceiveResult:
        """Collect datagrams until none arrive for ``idle_timeout_ms``.

        Each packet gets a nominal send time reconstructed from its media
        timestamp, anchored so the least-delayed packet has zero delay;
        delays are therefore relative one-way delays.
        """
        result = ReceiveResult()
        raw = []
        self.sock.settimeout(idle_timeout_ms / 1000.0)
        while True:
            try:
                data, _ = self.sock.recvfrom(_MAX_DATAGRAM)
            except socket.timeout:
                break
            arrival = time.monotonic() * 1000.0
            try:
                raw.append((parse_packet(data), arrival))
            except PacketError as exc:
                result.malformed += 1
                log.debug("skipping malformed datagram: %s", exc)
        result.packets = _anchor_send_times(raw)
        return result

    def close(self):
        self.sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _anchor_send_times(raw, clock_hz: int = 8000) -> list[DeliveredPacket]:
    if not raw:
        return []
    ts0 = raw[0][0].timestamp
    # signed media offset in ms, wrap-aware
    offsets = [(((p.timestamp - ts0 + 2**31) % 2**32) - 2**31) * 1000.0 / clock_hz for p, _ in raw]
    anchor = min(arr - off for (_, arr), off in zip(raw, offsets))
    return [DeliveredPacket(p, anchor + off, arr) for (p, arr), off in zip(raw, offsets)]


def recv_udp(listen_port: int = DEFAULT_PORT, idle_timeout_ms: float = 1000.0,
             host: str = "") -> ReceiveResult:
    with UdpReceiver(listen_port, host) as rx:
        return rx.receive(idle_timeout_ms)
