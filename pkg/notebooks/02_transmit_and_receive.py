# %% [markdown]
# # Transmit and receive chains
#
# Transmit side: WAV -> gain -> G.711 -> 20 ms packets with an RTP header.
# Receive side: packets -> jitter buffer -> G.711 decode. Here the channel
# is the in-process simulator; `voipkit send` / `voipkit recv` run the same
# chains over real UDP.

# %%
import tempfile
from pathlib import Path

from voipkit import ChannelConfig, PlayoutConfig, generate_tone, serialize_packet
from voipkit.pipeline import loopback, write_rx_analysis, write_tx_analysis

speech = generate_tone(440.0, 2.0, 0.6, 8000)

# %% [markdown]
# An ideal channel hands back exactly what was sent.

# %%
run = loopback(speech, law="mulaw", frame_ms=20, gain=1.0)
print(len(run.tx.packets), "packets of", len(run.tx.packets[0].payload), "codewords")
print("first wire bytes:", serialize_packet(run.tx.packets[0])[:16].hex(" "))
print(run.report.to_json())

# %% [markdown]
# Add loss and jitter. The jitter buffer re-orders packets and conceals the
# gaps; the SNR against the transmitted signal drops accordingly.

# %%
impaired = loopback(speech, channel=ChannelConfig(loss_prob=0.05, base_delay_ms=40,
                                                  jitter_ms=30, seed=1),
                    playout=PlayoutConfig(playout_delay_ms=60))
print(impaired.report.to_json())

# %% [markdown]
# Transmit and receive-side spectra as CSV files, ready for any plotter.

# %%
out = Path(tempfile.mkdtemp(prefix="voipkit-"))
write_tx_analysis(impaired.tx, out)
write_rx_analysis(impaired.delivered, impaired.rx, impaired.tx.law, out)
print(sorted(p.name for p in out.iterdir()))
