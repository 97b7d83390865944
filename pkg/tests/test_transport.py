import math
import socket
import threading
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voipkit.packetizer import FrameConfig, packetize, serialize_packet
from voipkit.transport import (ChannelConfig, SimulatedChannel, TransportError, UdpReceiver,
                               parse_endpoint, recv_udp, send_udp, simulate_channel)


def _packets(n, seq=0):
    return packetize(bytes(160 * n), FrameConfig(), initial_seq=seq, stream_id=1)


def test_degenerate_channel():
    pkts = _packets(50)
    out = simulate_channel(pkts, ChannelConfig(base_delay_ms=40))
    assert [d.packet for d in out] == pkts
    for i, d in enumerate(out):
        assert d.send_time_ms == i * 20
        assert d.arrival_time_ms == d.send_time_ms + 40


def test_total_loss():
    chan = SimulatedChannel(ChannelConfig(loss_prob=1.0))
    assert chan.transmit(_packets(30)) == []
    assert chan.dropped == 30


def test_loss_rate_three_sigma():
    chan = SimulatedChannel(ChannelConfig(loss_prob=0.1, seed=42))
    out = chan.transmit(_packets(100_000))
    observed = 1 - len(out) / 100_000
    assert abs(observed - 0.1) <= 3 * math.sqrt(0.1 * 0.9 / 100_000)
    assert chan.dropped == 100_000 - len(out)


def test_jitter_reorders_and_respects_floor():
    pkts = _packets(500)
    cfg = ChannelConfig(base_delay_ms=30, jitter_ms=60, seed=3)
    out = simulate_channel(pkts, cfg)
    seqs = [d.packet.sequence for d in out]
    assert seqs != sorted(seqs)
    assert all(cfg.base_delay_ms <= d.delay_ms <= cfg.base_delay_ms + cfg.jitter_ms for d in out)
    arrivals = [d.arrival_time_ms for d in out]
    assert arrivals == sorted(arrivals)


def test_equal_arrivals_keep_sequence_order():
    # 20 ms spacing with 20 ms jitter width can tie only if draws coincide;
    # force ties with a zero frame spacing
    out = SimulatedChannel(ChannelConfig(base_delay_ms=5)).transmit(_packets(10), frame_ms=0)
    assert [d.packet.sequence for d in out] == list(range(10))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 100), st.floats(0, 100), st.integers(0, 2**64 - 1))
def test_channel_determinism_and_subset(loss, delay, jitter, seed):
    pkts = _packets(60)
    cfg = ChannelConfig(loss, delay, jitter, seed)
    a, b = simulate_channel(pkts, cfg), simulate_channel(pkts, cfg)
    assert a == b
    seqs = [d.packet.sequence for d in a]
    assert len(set(seqs)) == len(seqs)
    sent = {p.sequence: p for p in pkts}
    assert all(sent[d.packet.sequence] == d.packet for d in a)


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(loss_prob=1.5)
    with pytest.raises(ValueError):
        ChannelConfig(jitter_ms=-1)
    with pytest.raises(ValueError):
        ChannelConfig(jitter_distribution="pareto")


def test_parse_endpoint():
    assert parse_endpoint("127.0.0.1:5000") == ("127.0.0.1", 5000)
    assert parse_endpoint("[::1]:6000") == ("::1", 6000)
    assert parse_endpoint("localhost") == ("localhost", 9714)


def _run_receiver(rx, timeout_ms, box):
    box["result"] = rx.receive(timeout_ms)


def test_udp_loopback_100_packets():
    pkts = _packets(100)
    with UdpReceiver(0, "127.0.0.1") as rx:
        box = {}
        t = threading.Thread(target=_run_receiver, args=(rx, 500, box))
        t.start()
        report = send_udp(pkts, ("127.0.0.1", rx.port), pacing_ms=2)
        t.join()
    got = box["result"]
    assert report.count == 100 and report.bytes_sent == 100 * 172
    assert len(got) == 100 and got.malformed == 0
    assert [d.packet for d in got] == pkts
    arrivals = [d.arrival_time_ms for d in got]
    assert arrivals == sorted(arrivals)
    assert min(d.delay_ms for d in got) == 0


def test_real_time_pacing():
    pkts = _packets(100)
    with UdpReceiver(0, "127.0.0.1") as rx:
        box = {}
        t = threading.Thread(target=_run_receiver, args=(rx, 300, box))
        t.start()
        report = send_udp(pkts, ("127.0.0.1", rx.port), pacing_ms=20)
        t.join()
    span = report.send_times_ms[-1] - report.send_times_ms[0]
    assert 1980 <= span <= 2080
    assert len(box["result"]) == 100


def test_malformed_datagram_skipped():
    pkts = _packets(5)
    with UdpReceiver(0, "127.0.0.1") as rx:
        box = {}
        t = threading.Thread(target=_run_receiver, args=(rx, 300, box))
        t.start()
        with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as s:
            for i, p in enumerate(pkts):
                wire = serialize_packet(p)
                s.sendto(b"\x40" + wire[1:] if i == 2 else wire, ("127.0.0.1", rx.port))
        t.join()
    assert len(box["result"]) == 4
    assert box["result"].malformed == 1


def test_idle_timeout_without_traffic():
    start = time.monotonic()
    got = recv_udp(0, 300, host="127.0.0.1")
    elapsed = time.monotonic() - start
    assert len(got) == 0
    assert 0.25 <= elapsed < 1.5


def test_ipv6_loopback():
    if not socket.has_ipv6:
        pytest.skip("no IPv6")
    try:
        rx = UdpReceiver(0, "::1")
    except TransportError:
        pytest.skip("IPv6 loopback unavailable")
    with rx:
        box = {}
        t = threading.Thread(target=_run_receiver, args=(rx, 300, box))
        t.start()
        send_udp(_packets(3), f"[::1]:{rx.port}", pacing_ms=0)
        t.join()
    assert len(box["result"]) == 3


def test_unresolvable_host():
    with pytest.raises(TransportError):
        send_udp(_packets(1), "no-such-host.invalid:9714", 0)


def test_bind_failure():
    with UdpReceiver(0, "127.0.0.1") as rx:
        with pytest.raises(TransportError):
            UdpReceiver(rx.port, "127.0.0.1")
