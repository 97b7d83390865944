# %% [markdown]
# # Spectral analysis
#
# Spectrum, periodogram, Welch PSD and spectrogram of a test signal, then
# the spectrum of the packetized byte stream itself.

# %%
import numpy as np

from voipkit import (AudioSignal, Window, generate_tone, packed_spectrum, packetize,
                     periodogram, spectrogram, spectrum, welch_psd)
from voipkit.codec import encode_frame

fs = 8000
t = np.arange(fs) / fs
chirp = 0.5 * np.sin(2 * np.pi * (200 + 1500 * t) * t)
signal = AudioSignal(fs, np.round(chirp * 32767).astype(np.int16))

# %% [markdown]
# A 1 kHz tone lands on bin 1000 * 1024 / 8000 = 128.

# %%
tone = generate_tone(1000.0, 1.0, 0.8, fs)
res = spectrum(tone, 1024)
print("peak bin", res.argmax_bin(), "at", res.freqs_hz[res.argmax_bin()], "Hz")

# %% [markdown]
# The density periodogram integrates to the mean square of the segment.

# %%
x = signal.samples[:1024] / 32768.0
pg = periodogram(signal, Window.RECTANGULAR, 1024)
print("integrated PSD", pg.total_power(), "mean square", np.mean(x ** 2))

# %% [markdown]
# Welch averaging trades resolution for a much smoother estimate.

# %%
noise = np.random.default_rng(0).standard_normal(8000)
single = periodogram(noise, Window.HANN, 256, fs=fs)
averaged = welch_psd(noise, 256, 0.5, Window.HANN, fs=fs)
print("variance single", single.power.var(), "welch", averaged.power.var())

# %% [markdown]
# The spectrogram follows the chirp upwards.

# %%
sg = spectrogram(signal, 256, 128, Window.HANN)
ridge = sg.freqs_hz[sg.power.argmax(axis=1)]
print("ridge every 10th frame (Hz):", ridge[::10].round())

# %% [markdown]
# Packed spectrum: the serialized packets viewed as a byte signal. The
# 172-byte packet period shows up as a line at the packet rate and its
# harmonics.

# %%
pkts = packetize(encode_frame(tone.samples).data)
ps = packed_spectrum(pkts, 4096)
top = np.argsort(ps.power[1:])[-5:] + 1
print("strongest lines (Hz):", np.sort(ps.freqs_hz[top]).round(1))
