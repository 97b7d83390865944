# %% [markdown]
# # Impairments and QoS
#
# Sweep loss and jitter through the simulated channel and watch the
# transport metrics and the reconstruction SNR respond. Every run is
# reproducible from its seed.

# %%
from voipkit import ChannelConfig, PlayoutConfig, generate_tone
from voipkit.pipeline import loopback

signal = generate_tone(700.0, 5.0, 0.5, 8000)

# %%
print(f"{'loss':>5} {'measured':>9} {'concealed':>9} {'snr_db':>7}")
for loss in (0.0, 0.01, 0.05, 0.1, 0.2):
    rep = loopback(signal, channel=ChannelConfig(loss_prob=loss, seed=3)).report
    snr = "inf" if rep.snr_db == float("inf") else f"{rep.snr_db:7.2f}"
    print(f"{loss:5.2f} {rep.loss_rate:9.3f} {rep.concealed_count:9d} {snr:>7}")

# %% [markdown]
# Jitter against a fixed 60 ms playout delay: once the delay spread exceeds
# the buffer, packets arrive after their slot and are counted late.

# %%
print(f"{'jitter':>6} {'J_ms':>6} {'p95_ms':>7} {'late':>5}")
for jitter in (0, 20, 40, 80, 160):
    rep = loopback(signal, channel=ChannelConfig(base_delay_ms=20, jitter_ms=jitter, seed=3),
                   playout=PlayoutConfig(60)).report
    print(f"{jitter:6d} {rep.interarrival_jitter_ms:6.2f} {rep.delay_ms.p95:7.1f} {rep.late_count:5d}")
