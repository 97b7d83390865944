"""Command line front end: ``voipkit {send,recv,loopback,analyze,tone}``.

Exit status is 0 on success; failures print ``error [stage]: message`` to
stderr and exit with one of the codes below. Any flag may also be given in
a ``--config`` file of ``key = value`` lines (keys are flag names without
the leading dashes); flags on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .audio_io import generate_tone, read_wav, write_wav
from .codec import CompandingLaw
from .dsp import Window
from .jitter_buffer import Concealment, PlayoutConfig
from .packetizer import FrameConfig
from .pipeline import (AnalysisConfig, build_report, loopback, receive, transmit,
                       write_rx_analysis, write_signal_analysis, write_tx_analysis)
from .transport import DEFAULT_PORT, ChannelConfig, UdpReceiver, send_udp

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NETWORK = 4
EXIT_NO_TRAFFIC = 5
EXIT_OUTPUT = 6

log = logging.getLogger("voipkit")


class StageError(Exception):
    def __init__(self, stage: str, message: str, code: int = EXIT_FAILURE):
        super().__init__(message)
        self.stage = stage
        self.code = code


def _stage(stage: str, code: int, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (OSError, ValueError) as exc:
        raise StageError(stage, str(exc), code) from exc


# -- argument types ------------------------------------------------------------

def _law(text):
    try:
        return CompandingLaw.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _concealment(text):
    try:
        return Concealment.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _window(text):
    try:
        return Window.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _non_negative(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _probability(text):
    v = float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _pow2(text):
    v = int(text)
    if v < 16 or v & (v - 1):
        raise argparse.ArgumentTypeError(f"must be a power of two >= 16, got {text}")
    return v


def _port(text):
    v = int(text)
    if not 0 <= v <= 65535:
        raise argparse.ArgumentTypeError(f"invalid port {text}")
    return v


# -- parser ------------------------------------------------------------------------

def _codec_flags(p):
    p.add_argument("--codec", type=_law, default=CompandingLaw.MULAW,
                   help="G.711 law: mulaw or alaw (default: mulaw)")
    p.add_argument("--frame-ms", type=_positive_int, default=20,
                   help="packet duration in ms (default: 20)")
    p.add_argument("--gain", type=_non_negative, default=1.0,
                   help="linear gain before the codec (default: 1.0)")


def _playout_flags(p):
    p.add_argument("--playout-ms", type=_non_negative, default=60.0,
                   help="fixed playout delay in ms (default: 60)")
    p.add_argument("--concealment", type=_concealment, default=Concealment.REPEAT_LAST,
                   help="lost-frame concealment: repeat or silence (default: repeat)")


def _analysis_flags(p):
    p.add_argument("--n-fft", type=_pow2, default=1024, help="FFT size (default: 1024)")
    p.add_argument("--window", type=_window, default=Window.HANN,
                   help="analysis window: hann or rectangular (default: hann)")
    p.add_argument("--window-len", type=_positive_int, default=256,
                   help="spectrogram/Welch segment length (default: 256)")
    p.add_argument("--hop", type=_positive_int, default=128, help="spectrogram hop (default: 128)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voipkit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("send", help="transmit a WAV file over UDP")
    p.add_argument("input", type=Path, help="mono 16-bit PCM WAV")
    _codec_flags(p)
    p.add_argument("--dest", default=f"127.0.0.1:{DEFAULT_PORT}",
                   help=f"destination host:port (default: 127.0.0.1:{DEFAULT_PORT})")
    p.add_argument("--pacing-ms", type=_non_negative, default=None,
                   help="gap between datagrams in ms (default: the frame duration)")
    p.add_argument("--stream-id", type=lambda s: int(s, 0), default=None)
    p.add_argument("--report", type=Path, default=None, help="write the send report JSON here")

    p = sub.add_parser("recv", help="receive a UDP stream and decode it")
    p.add_argument("--port", type=_port, default=DEFAULT_PORT, help=f"listen port (default: {DEFAULT_PORT})")
    p.add_argument("--bind", default="", help="local address to bind (default: all)")
    p.add_argument("--codec", type=_law, default=None,
                   help="expected G.711 law (default: taken from the payload type)")
    p.add_argument("--sample-rate", type=_positive_int, default=8000,
                   help="codec clock in Hz (default: 8000)")
    _playout_flags(p)
    p.add_argument("--output", type=Path, required=True, help="decoded WAV to write")
    p.add_argument("--report", type=Path, default=None, help="QoS report JSON to write")
    p.add_argument("--idle-timeout-ms", type=_non_negative, default=2000.0,
                   help="stop after this long without traffic (default: 2000)")
    p.add_argument("--analysis-dir", type=Path, default=None,
                   help="also write receiver-side spectra here")
    _analysis_flags(p)

    p = sub.add_parser("loopback", help="run send and receive through a simulated channel")
    p.add_argument("input", type=Path)
    _codec_flags(p)
    p.add_argument("--loss", type=_probability, default=0.0, help="packet loss probability (default: 0)")
    p.add_argument("--delay-ms", type=_non_negative, default=0.0, help="base one-way delay (default: 0)")
    p.add_argument("--jitter-ms", type=_non_negative, default=0.0,
                   help="width of uniform extra delay (default: 0)")
    p.add_argument("--seed", type=int, default=0, help="channel RNG seed (default: 0)")
    _playout_flags(p)
    p.add_argument("--output", type=Path, default=None, help="decoded WAV to write")
    p.add_argument("--analysis-dir", type=Path, required=True)
    _analysis_flags(p)

    p = sub.add_parser("analyze", help="spectral analysis of a WAV file")
    p.add_argument("input", type=Path)
    _analysis_flags(p)
    p.add_argument("--out-dir", type=Path, required=True)

    p = sub.add_parser("tone", help="write a sine test tone")
    p.add_argument("--freq", type=float, default=1000.0, help="frequency in Hz (default: 1000)")
    p.add_argument("--dur", type=_non_negative, default=1.0, help="duration in s (default: 1.0)")
    p.add_argument("--amp", type=_probability, default=0.5, help="amplitude 0..1 (default: 0.5)")
    p.add_argument("--fs", type=_positive_int, default=8000, help="sample rate (default: 8000)")
    p.add_argument("--out", type=Path, required=True)

    for action in [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]:
        for subparser in action.choices.values():
            subparser.add_argument("--config", type=Path, default=None,
                                   help="key = value file supplying defaults for any flag")
    return parser


def load_config(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, quotes are stripped."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key.strip().replace("-", "_")] = value
    return values


def parse_args(argv=None) -> argparse.Namespace:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if known.config is not None and command is not None:
        try:
            cfg = load_config(known.config)
        except (OSError, ValueError) as exc:
            parser.error(f"config: {exc}")
        _apply_config(parser, command, cfg)
    return parser.parse_args(argv)


def _apply_config(parser, command: str, cfg: dict[str, str]) -> None:
    """Install config values as subcommand defaults; explicit flags still win."""
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub.choices[command]
    known = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in cfg.items():
        action = known.get(key)
        if action is None or key in ("help", "config"):
            parser.error(f"config: unknown key {key!r} for {command}")
        if not action.option_strings:
            parser.error(f"config: {key!r} is positional; give it on the command line")
        try:
            defaults[key] = action.type(value) if action.type else value
        except (ValueError, argparse.ArgumentTypeError) as exc:
            parser.error(f"config: {key}: {exc}")
        action.required = False
    subparser.set_defaults(**defaults)


# -- commands --------------------------------------------------------------------

def _write_json(path: Path, payload, stage: str = "output"):
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    _stage(stage, EXIT_OUTPUT, Path(path).write_text, text)


def cmd_send(args) -> int:
    signal = _stage("input", EXIT_INPUT, read_wav, args.input)
    kwargs = {} if args.stream_id is None else {"stream_id": args.stream_id}
    tx = _stage("encode", EXIT_INPUT, transmit, signal, args.codec, args.frame_ms, args.gain, **kwargs)
    pacing = args.frame_ms if args.pacing_ms is None else args.pacing_ms
    report = _stage("network", EXIT_NETWORK, send_udp, tx.packets, args.dest, pacing)
    out = report.to_dict()
    out["codec"] = tx.law.value
    out["frame_ms"] = args.frame_ms
    if args.report:
        _write_json(args.report, out)
    else:
        print(json.dumps({k: v for k, v in out.items() if k != "send_times_ms"}))
    return EXIT_OK


def cmd_recv(args) -> int:
    rx_sock = _stage("network", EXIT_NETWORK, UdpReceiver, args.port, args.bind)
    with rx_sock:
        log.info("listening on port %d", rx_sock.port)
        got = _stage("network", EXIT_NETWORK, rx_sock.receive, args.idle_timeout_ms)
    if not got.packets:
        raise StageError("network", f"no traffic within {args.idle_timeout_ms:g} ms", EXIT_NO_TRAFFIC)
    if got.malformed:
        log.warning("skipped %d malformed datagrams", got.malformed)

    delivered = got.packets
    law = args.codec or delivered[0].packet.law
    # frame size follows from the payload length
    frame_samples = len(delivered[0].packet.payload)
    frame_ms = frame_samples * 1000 // args.sample_rate
    cfg = _stage("decode", EXIT_INPUT, FrameConfig, frame_ms, args.sample_rate)
    if cfg.frame_samples != frame_samples:
        raise StageError("decode", f"{frame_samples}-byte payloads are not a whole number of ms", EXIT_INPUT)
    seqs = [d.packet.sequence for d in delivered]
    first = seqs[0]
    offsets = [((s - first + 32768) % 65536) - 32768 for s in seqs]
    # sender count estimated from the sequence span, as RTP receivers do
    initial_seq = (first + min(offsets)) % 65536
    expected = max(offsets) - min(offsets) + 1
    rx = _stage("decode", EXIT_FAILURE, receive, delivered, law, cfg,
                PlayoutConfig(args.playout_ms, args.concealment), initial_seq, expected)
    report = build_report(expected, delivered, rx, None, cfg.sample_rate_hz)
    _stage("output", EXIT_OUTPUT, write_wav, rx.signal, args.output)
    if args.report:
        _write_json(args.report, report.to_json())
    else:
        print(report.to_json(), end="")
    if args.analysis_dir:
        _stage("analysis", EXIT_FAILURE, write_rx_analysis, delivered, rx, law, args.analysis_dir,
               _analysis_config(args))
    return EXIT_OK


def _analysis_config(args) -> AnalysisConfig:
    if args.hop > args.window_len:
        raise StageError("analysis", "hop must not exceed window length", EXIT_USAGE)
    return AnalysisConfig(args.n_fft, args.window, args.window_len, args.hop)


def cmd_loopback(args) -> int:
    acfg = _analysis_config(args)
    signal = _stage("input", EXIT_INPUT, read_wav, args.input)
    channel = _stage("channel", EXIT_USAGE, ChannelConfig, args.loss, args.delay_ms, args.jitter_ms,
                     args.seed % 2**64)
    run = _stage("pipeline", EXIT_FAILURE, loopback, signal, args.codec, args.frame_ms, args.gain,
                 channel, PlayoutConfig(args.playout_ms, args.concealment))
    out = Path(args.analysis_dir)
    _stage("analysis", EXIT_OUTPUT, write_tx_analysis, run.tx, out, acfg)
    _stage("analysis", EXIT_OUTPUT, write_rx_analysis, run.delivered, run.rx, run.tx.law, out, acfg)
    _write_json(out / "qos_report.json", run.report.to_json())
    if args.output:
        _stage("output", EXIT_OUTPUT, write_wav, run.rx.signal, args.output)
    print(run.report.to_json(), end="")
    return EXIT_OK


def cmd_analyze(args) -> int:
    acfg = _analysis_config(args)
    signal = _stage("input", EXIT_INPUT, read_wav, args.input)
    _stage("analysis", EXIT_FAILURE, write_signal_analysis, signal, args.out_dir, acfg)
    return EXIT_OK


def cmd_tone(args) -> int:
    tone = _stage("tone", EXIT_USAGE, generate_tone, args.freq, args.dur, args.amp, args.fs)
    _stage("output", EXIT_OUTPUT, write_wav, tone, args.out)
    return EXIT_OK


COMMANDS = {
    "send": cmd_send,
    "recv": cmd_recv,
    "loopback": cmd_loopback,
    "analyze": cmd_analyze,
    "tone": cmd_tone,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
