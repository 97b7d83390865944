# %% [markdown]
# # G.711 companding
#
# Both laws squeeze a 16-bit sample into one byte. Small amplitudes keep
# fine steps, large ones get coarse steps, so the relative error stays
# roughly constant over the range. This walks through the quantizer and
# measures its error.

# %%
import numpy as np

from voipkit import (AudioSignal, CompandingLaw, decode_frame, encode_frame, generate_tone,
                     mulaw_decode, mulaw_encode, reconstruction_snr)

# %% [markdown]
# A few codewords. Silence is 0xFF in mu-law and 0xD5 in A-law.

# %%
for x in (0, 1, 100, 1000, 10000, 32767, -32767):
    print(f"{x:7d} -> mu-law {mulaw_encode(x):#04x} -> {mulaw_decode(mulaw_encode(x)):7d}")

# %% [markdown]
# Quantization step as a function of input level: within one segment the
# step is constant and it doubles from one segment to the next.

# %%
pcm = np.arange(0, 32768)
for law in CompandingLaw:
    recon = decode_frame(encode_frame(pcm, law)).astype(int)
    levels = np.unique(recon)
    steps = np.diff(levels)
    print(law.value, "distinct positive levels:", levels.size,
          "smallest/largest step:", steps.min(), steps.max())

# %% [markdown]
# Reconstruction SNR for a 1 kHz tone at several levels. Companding keeps
# it in the mid-30 dB range across all of these levels.

# %%
for dbfs in (-3, -10, -20, -30, -40):
    tone = generate_tone(1000.0, 1.0, 10 ** (dbfs / 20), 8000)
    for law in CompandingLaw:
        rx = AudioSignal(8000, decode_frame(encode_frame(tone.samples, law)))
        print(f"{dbfs:4d} dBFS {law.value:6s} SNR {reconstruction_snr(tone, rx):6.2f} dB")
