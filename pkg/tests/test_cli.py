import json
import threading

import jsonschema
import numpy as np
import pytest

from voipkit import cli
from voipkit.audio_io import AudioSignal, generate_tone, read_wav, write_wav
from voipkit.dsp import read_spectrum_csv
from voipkit.qos import QOS_REPORT_SCHEMA
from voipkit.transport import UdpReceiver

EXPECTED_PRODUCTS = {
    "tx_spectrum.csv", "tx_periodogram.csv", "tx_welch_psd.csv", "tx_spectrogram.csv",
    "tx_packed_spectrum.csv", "rx_unpacked_spectrum.csv", "rx_spectrum.csv",
    "rx_periodogram.csv", "rx_spectrogram.csv", "qos_report.json",
}


def _free_port():
    with UdpReceiver(0, "127.0.0.1") as rx:
        return rx.port


def test_tone_command(tmp_path):
    out = tmp_path / "t.wav"
    assert cli.main(["tone", "--freq", "1000", "--dur", "1", "--amp", "0.5", "--fs", "8000",
                     "--out", str(out)]) == 0
    sig = read_wav(out)
    assert len(sig) == 8000
    assert abs(int(np.abs(sig.samples.astype(int)).max()) - 16384) <= 1


@pytest.mark.parametrize("freq", ["0", "4000"])
def test_tone_rejects_bad_frequency(tmp_path, freq, capsys):
    assert cli.main(["tone", "--freq", freq, "--out", str(tmp_path / "x.wav")]) == cli.EXIT_USAGE
    assert "error [tone]" in capsys.readouterr().err
    assert not (tmp_path / "x.wav").exists()


def test_analyze_tone(tmp_path, tone_wav):
    out = tmp_path / "an"
    assert cli.main(["analyze", str(tone_wav), "--out-dir", str(out)]) == 0
    f, p = read_spectrum_csv(out / "spectrum.csv")
    assert int(np.argmax(p)) == 128 and f[128] == 1000.0
    assert {x.name for x in out.iterdir()} == {"spectrum.csv", "periodogram.csv",
                                               "welch_psd.csv", "spectrogram.csv"}


def test_analyze_missing_file(tmp_path, capsys):
    code = cli.main(["analyze", str(tmp_path / "nope.wav"), "--out-dir", str(tmp_path)])
    assert code == cli.EXIT_INPUT
    assert "error [input]" in capsys.readouterr().err


def test_help_documents_defaults(capsys):
    with pytest.raises(SystemExit):
        cli.main(["loopback", "--help"])
    text = " ".join(capsys.readouterr().out.split())
    for fragment in ("(default: mulaw)", "(default: 20)", "(default: 1.0)", "(default: 1024)",
                     "(default: hann)", "(default: 256)", "(default: 128)", "(default: 60)",
                     "(default: repeat)"):
        assert fragment in text
    with pytest.raises(SystemExit):
        cli.main(["recv", "--help"])
    assert "(default: 9714)" in capsys.readouterr().out


def test_flag_validation_before_io(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["loopback", str(tmp_path / "missing.wav"), "--loss", "2",
                  "--analysis-dir", str(tmp_path / "a")])
    assert exc.value.code == 2
    assert not (tmp_path / "a").exists()


def _loopback(tmp_path, wav, name, *extra):
    out = tmp_path / name
    code = cli.main(["loopback", str(wav), "--analysis-dir", str(out),
                     "--output", str(out / "rx.wav"), *extra])
    assert code == 0
    return out


def test_loopback_identity(tmp_path, tone_wav):
    out = _loopback(tmp_path, tone_wav, "run")
    assert {p.name for p in out.iterdir()} == EXPECTED_PRODUCTS | {"rx.wav"}
    report = json.loads((out / "qos_report.json").read_text())
    jsonschema.validate(report, QOS_REPORT_SCHEMA)
    assert report["snr_db"] == "infinite" and report["concealed_count"] == 0
    _, tx = read_spectrum_csv(out / "tx_spectrum.csv")
    _, rx = read_spectrum_csv(out / "rx_spectrum.csv")
    np.testing.assert_allclose(rx, tx, rtol=1e-9, atol=0)


def test_loopback_deterministic(tmp_path, tone_wav):
    flags = ["--loss", "0.5", "--jitter-ms", "30", "--delay-ms", "10", "--seed", "17"]
    a = _loopback(tmp_path, tone_wav, "a", *flags)
    b = _loopback(tmp_path, tone_wav, "b", *flags)
    for f in sorted(EXPECTED_PRODUCTS | {"rx.wav"}):
        assert (a / f).read_bytes() == (b / f).read_bytes(), f


def test_config_file_with_flag_precedence(tmp_path, tone_wav):
    cfg = tmp_path / "run.conf"
    cfg.write_text("# impaired run\nloss = 0.3\nseed = 5\nanalysis-dir = \"%s\"\n"
                   % (tmp_path / "from_cfg"))
    assert cli.main(["loopback", str(tone_wav), "--config", str(cfg), "--seed", "6"]) == 0
    args = cli.parse_args(["loopback", str(tone_wav), "--config", str(cfg), "--seed", "6"])
    assert (args.loss, args.seed) == (0.3, 6)
    assert (tmp_path / "from_cfg" / "qos_report.json").exists()
    cfg.write_text("bogus = 1\n")
    with pytest.raises(SystemExit):
        cli.parse_args(["loopback", str(tone_wav), "--config", str(cfg)])


def test_send_report_and_bad_input(tmp_path, tone_wav, capsys):
    port = _free_port()
    report = tmp_path / "send.json"
    assert cli.main(["send", str(tone_wav), "--dest", f"127.0.0.1:{port}", "--pacing-ms", "0",
                     "--report", str(report)]) == 0
    assert json.loads(report.read_text())["sent_count"] == 50
    bad = tmp_path / "bad.wav"
    bad.write_bytes(b"garbage")
    assert cli.main(["send", str(bad)]) == cli.EXIT_INPUT
    assert "error [input]" in capsys.readouterr().err


def test_send_saturating_gain(tmp_path):
    loud = tmp_path / "loud.wav"
    write_wav(AudioSignal(8000, np.full(8000, 32000, np.int16)), loud)
    assert cli.main(["send", str(loud), "--gain", "2.0", "--pacing-ms", "0",
                     "--dest", f"127.0.0.1:{_free_port()}"]) == 0


def test_send_unresolvable(tmp_path, tone_wav, capsys):
    assert cli.main(["send", str(tone_wav), "--dest", "no-such-host.invalid:9"]) == cli.EXIT_NETWORK
    assert "error [network]" in capsys.readouterr().err


def test_recv_no_traffic(tmp_path, capsys):
    code = cli.main(["recv", "--port", str(_free_port()), "--bind", "127.0.0.1",
                     "--idle-timeout-ms", "200", "--output", str(tmp_path / "o.wav")])
    assert code == cli.EXIT_NO_TRAFFIC
    assert "no traffic" in capsys.readouterr().err


def test_send_recv_pair(tmp_path):
    sig = generate_tone(700, 1.01, 0.5)
    src = tmp_path / "in.wav"
    write_wav(sig, src)
    port = _free_port()
    out, rep = tmp_path / "out.wav", tmp_path / "qos.json"
    box = {}
    recv = threading.Thread(target=lambda: box.setdefault("code", cli.main(
        ["recv", "--port", str(port), "--bind", "127.0.0.1", "--idle-timeout-ms", "400",
         "--output", str(out), "--report", str(rep), "--analysis-dir", str(tmp_path / "rx")])))
    recv.start()
    import time
    time.sleep(0.2)
    assert cli.main(["send", str(src), "--dest", f"127.0.0.1:{port}", "--pacing-ms", "2"]) == 0
    recv.join()
    assert box["code"] == 0
    assert len(read_wav(out)) == 51 * 160
    report = json.loads(rep.read_text())
    jsonschema.validate(report, QOS_REPORT_SCHEMA)
    assert report["sent_count"] == 51 and report["loss_rate"] == 0.0
    assert (tmp_path / "rx" / "rx_spectrum.csv").exists()
