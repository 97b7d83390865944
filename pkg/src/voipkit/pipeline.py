"""Transmit, receive and analysis chains built from the individual stages.

Transmit: PCM -> gain -> G.711 encode -> packetize.
Receive: delivered packets -> jitter buffer -> depacketize -> G.711 decode.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dsp
from .audio_io import AudioSignal, apply_gain
from .codec import CompandingLaw, EncodedPayload, decode_frame, encode_frame
from .jitter_buffer import FrameOrigin, JitterBuffer, PlayoutConfig, PlayoutFrame, run_playout, seq_diff
from .packetizer import FrameConfig, Packetizer, VoipPacket, depacketize
from .qos import QosReport, delay_stats, interarrival_jitter, loss_rate, reconstruction_snr
from .transport import ChannelConfig, DeliveredPacket, SimulatedChannel

DEFAULT_STREAM_ID = 0x564F4950


@dataclass(frozen=True)
class AnalysisConfig:
    n_fft: int = 1024
    window: dsp.Window = dsp.Window.HANN
    window_len: int = 256
    hop: int = 128
    welch_overlap: float = 0.5


@dataclass
class TransmitResult:
    gained: AudioSignal
    encoded: EncodedPayload
    packets: list[VoipPacket]
    frame_cfg: FrameConfig

    @property
    def law(self) -> CompandingLaw:
        return self.encoded.law

    def reference(self) -> AudioSignal:
        """What a perfect receiver would play: the decoded packet payloads,
        including the tail padding."""
        return AudioSignal(self.gained.sample_rate_hz,
                           decode_frame(depacketize(self.packets), self.law))


def transmit(signal: AudioSignal, law=CompandingLaw.MULAW, frame_ms: int = 20, gain: float = 1.0,
             initial_seq: int = 0, initial_ts: int = 0,
             stream_id: int = DEFAULT_STREAM_ID) -> TransmitResult:
    law = CompandingLaw.parse(law)
    cfg = FrameConfig(frame_ms, signal.sample_rate_hz)
    gained = apply_gain(signal, gain)
    encoded = encode_frame(gained.samples, law)
    packets = Packetizer(cfg, law, initial_seq, initial_ts, stream_id).packetize(encoded.data)
    return TransmitResult(gained, encoded, packets, cfg)


@dataclass
class ReceiveOutput:
    signal: AudioSignal
    frames: list
    buffer: JitterBuffer | None

    @property
    def concealed(self) -> int:
        return sum(f.origin is FrameOrigin.CONCEALED for f in self.frames)

    @property
    def late(self) -> int:
        return self.buffer.late if self.buffer is not None else 0


def receive(delivered, law=CompandingLaw.MULAW, frame_cfg: FrameConfig = FrameConfig(),
            playout: PlayoutConfig = PlayoutConfig(), initial_seq: int | None = None,
            frame_count: int | None = None) -> ReceiveOutput:
    law = CompandingLaw.parse(law)
    frames, buf = run_playout(delivered, frame_cfg.frame_samples, law, playout,
                              frame_cfg.frame_ms, initial_seq, frame_count)
    if buf is None and frame_count:
        # nothing arrived: every expected frame is concealed as silence
        silence = bytes([law.silence]) * frame_cfg.frame_samples
        start = initial_seq or 0
        frames = [PlayoutFrame(silence, FrameOrigin.CONCEALED, (start + i) % 65536)
                  for i in range(frame_count)]
    payload = b"".join(f.payload for f in frames)
    samples = decode_frame(payload, law)
    return ReceiveOutput(AudioSignal(frame_cfg.sample_rate_hz, samples), frames, buf)


def unpacked_signal(delivered, law, sample_rate_hz: int) -> AudioSignal:
    """Decode of the received packets in sequence order, no concealment."""
    pkts = [d.packet for d in delivered]
    if pkts:
        ref = pkts[0].sequence
        pkts.sort(key=lambda p: seq_diff(p.sequence, ref))
    return AudioSignal(sample_rate_hz, decode_frame(depacketize(pkts), law))


def build_report(sent_count: int, delivered, rx: ReceiveOutput,
                 reference: AudioSignal | None = None, clock_hz: int = 8000) -> QosReport:
    delivered = list(delivered)
    snr = None
    if reference is not None:
        try:
            snr = reconstruction_snr(reference, rx.signal)
        except ValueError:
            snr = None
    return QosReport(
        sent_count=sent_count,
        received_count=len(delivered),
        late_count=rx.late,
        concealed_count=rx.concealed,
        loss_rate=loss_rate(sent_count, delivered),
        delay_ms=delay_stats(delivered) if delivered else None,
        interarrival_jitter_ms=interarrival_jitter(delivered, clock_hz) if len(delivered) >= 2 else None,
        snr_db=snr,
    )


@dataclass
class LoopbackResult:
    tx: TransmitResult
    delivered: list[DeliveredPacket]
    channel: SimulatedChannel
    rx: ReceiveOutput
    report: QosReport


def loopback(signal: AudioSignal, law=CompandingLaw.MULAW, frame_ms: int = 20, gain: float = 1.0,
             channel: ChannelConfig = ChannelConfig(), playout: PlayoutConfig = PlayoutConfig(),
             stream_id: int = DEFAULT_STREAM_ID) -> LoopbackResult:
    """Transmit, pass through the simulated channel, and play out."""
    tx = transmit(signal, law, frame_ms, gain, stream_id=stream_id)
    chan = SimulatedChannel(channel)
    delivered = chan.transmit(tx.packets, frame_ms)
    rx = receive(delivered, tx.law, tx.frame_cfg, playout,
                 initial_seq=tx.packets[0].sequence, frame_count=len(tx.packets))
    report = build_report(len(tx.packets), delivered, rx, tx.reference(), tx.frame_cfg.sample_rate_hz)
    return LoopbackResult(tx, delivered, chan, rx, report)


# -- analysis products -------------------------------------------------------

TX_PRODUCTS = ("tx_spectrum.csv", "tx_periodogram.csv", "tx_welch_psd.csv",
               "tx_spectrogram.csv", "tx_packed_spectrum.csv")
RX_PRODUCTS = ("rx_unpacked_spectrum.csv", "rx_spectrum.csv", "rx_periodogram.csv",
               "rx_spectrogram.csv")
ANALYZE_PRODUCTS = ("spectrum.csv", "periodogram.csv", "welch_psd.csv", "spectrogram.csv")


def _signal_products(signal: AudioSignal, out: Path, prefix: str, cfg: AnalysisConfig,
                     welch: bool = True) -> None:
    dsp.write_spectrum_csv(dsp.spectrum(signal, cfg.n_fft), out / f"{prefix}spectrum.csv")
    dsp.write_spectrum_csv(dsp.periodogram(signal, cfg.window, cfg.n_fft), out / f"{prefix}periodogram.csv")
    if welch:
        psd = dsp.welch_psd(signal, min(cfg.window_len, len(signal)), cfg.welch_overlap, cfg.window)
        dsp.write_spectrum_csv(psd, out / f"{prefix}welch_psd.csv")
    if len(signal) >= cfg.window_len:
        sg = dsp.spectrogram(signal, cfg.window_len, cfg.hop, cfg.window)
    else:
        sg = dsp.spectrogram(signal, len(signal), len(signal), cfg.window)
    dsp.write_spectrogram_csv(sg, out / f"{prefix}spectrogram.csv")


def write_tx_analysis(tx: TransmitResult, out_dir, cfg: AnalysisConfig = AnalysisConfig()) -> None:
    """Transmit-side spectra of the signal as carried by the packets."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _signal_products(tx.reference(), out, "tx_", cfg)
    dsp.write_spectrum_csv(dsp.packed_spectrum(tx.packets, cfg.n_fft, tx.frame_cfg.sample_rate_hz),
                           out / "tx_packed_spectrum.csv")


def write_rx_analysis(delivered, rx: ReceiveOutput, law, out_dir,
                      cfg: AnalysisConfig = AnalysisConfig()) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fs = rx.signal.sample_rate_hz
    unpacked = unpacked_signal(delivered, law, fs)
    if len(unpacked) == 0:
        unpacked = AudioSignal(fs, np.zeros(1, dtype=np.int16))
    dsp.write_spectrum_csv(dsp.spectrum(unpacked, cfg.n_fft), out / "rx_unpacked_spectrum.csv")
    _signal_products(rx.signal, out, "rx_", cfg, welch=False)


def write_signal_analysis(signal: AudioSignal, out_dir, cfg: AnalysisConfig = AnalysisConfig()) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _signal_products(signal, out, "", cfg)
