"""G.711 mu-law and A-law companding.

The bit manipulation follows the classic 16-bit reference formulation:
mu-law clamps the magnitude to 32635, adds a bias of 132 and keeps a 3-bit
segment plus 4 mantissa bits; A-law works on the top 13 bits, takes the
one's complement of negative inputs and inverts the even bits (XOR 0x55).
Decoding returns the midpoint of each quantization interval, which is what
makes ``encode(decode(b)) == b`` hold for every codeword. The single
exception to the reference tables is mu-law 0x7F, decoded as -1 instead of
0 so that it too round trips.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

MULAW_BIAS = 132
MULAW_CLIP = 32635
NEGATIVE_ZERO = 0x7F


class CompandingLaw(enum.Enum):
    MULAW = "mulaw"
    ALAW = "alaw"

    @property
    def payload_type(self) -> int:
        """RTP static payload type: 0 (PCMU) or 8 (PCMA)."""
        return 0 if self is CompandingLaw.MULAW else 8

    @property
    def silence(self) -> int:
        """Codeword that decodes to (near) zero."""
        return 0xFF if self is CompandingLaw.MULAW else 0xD5

    @classmethod
    def from_payload_type(cls, pt: int) -> "CompandingLaw":
        if pt == 0:
            return cls.MULAW
        if pt == 8:
            return cls.ALAW
        raise ValueError(f"unknown payload type {pt}")

    @classmethod
    def parse(cls, name) -> "CompandingLaw":
        if isinstance(name, cls):
            return name
        key = str(name).lower().replace("-", "").replace("_", "")
        aliases = {"mulaw": cls.MULAW, "ulaw": cls.MULAW, "pcmu": cls.MULAW,
                   "alaw": cls.ALAW, "pcma": cls.ALAW}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown companding law {name!r}") from None


@dataclass(frozen=True)
class EncodedPayload:
    data: bytes
    law: CompandingLaw

    def __len__(self):
        return len(self.data)


# segment number = position of the highest set bit of (biased >> 7), 0..7
def _segment(v: np.ndarray) -> np.ndarray:
    seg = np.zeros(v.shape, dtype=np.int32)
    for s in range(1, 8):
        seg += (v >= (1 << (s + 7))).astype(np.int32)
    return seg


def _mulaw_encode_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int32)
    sign = np.where(x < 0, 0x80, 0x00)
    mag = np.minimum(np.abs(x), MULAW_CLIP) + MULAW_BIAS
    exponent = _segment(mag)
    mantissa = (mag >> (exponent + 3)) & 0x0F
    return (~(sign | (exponent << 4) | mantissa) & 0xFF).astype(np.uint8)


def _mulaw_decode_array(b: np.ndarray) -> np.ndarray:
    u = ~b.astype(np.int32) & 0xFF
    exponent = (u >> 4) & 0x07
    t = (((u & 0x0F) << 3) + MULAW_BIAS) << exponent
    out = np.where(u & 0x80, MULAW_BIAS - t, t - MULAW_BIAS)
    # the reference table maps negative zero (0x7F) to 0, which would make
    # 0x7F the only codeword that does not survive decode -> encode; -1 is
    # the nearest value inside its interval
    out = np.where(b == NEGATIVE_ZERO, -1, out)
    return out.astype(np.int16)


_ALAW_SEG_END = np.array([0x1F, 0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF])


def _alaw_encode_array(x: np.ndarray) -> np.ndarray:
    v = x.astype(np.int32) >> 3
    mask = np.where(v >= 0, 0xD5, 0x55)
    v = np.where(v >= 0, v, -v - 1)
    seg = np.searchsorted(_ALAW_SEG_END, v, side="left").astype(np.int32)
    shift = np.where(seg < 2, 1, seg)
    aval = (seg << 4) | ((v >> shift) & 0x0F)
    return ((aval ^ mask) & 0xFF).astype(np.uint8)


def _alaw_decode_array(b: np.ndarray) -> np.ndarray:
    a = b.astype(np.int32) ^ 0x55
    t = (a & 0x0F) << 4
    seg = (a & 0x70) >> 4
    t = np.where(seg == 0, t + 8, t + 0x108)
    t = np.where(seg > 1, t << np.maximum(seg - 1, 0), t)
    return np.where(a & 0x80, t, -t).astype(np.int16)


_ALL_PCM = np.arange(-32768, 32768, dtype=np.int32)
_ALL_CODES = np.arange(256, dtype=np.int32)

# lookup tables indexed by (pcm + 32768) and by codeword
_ENCODE_LUT = {
    CompandingLaw.MULAW: _mulaw_encode_array(_ALL_PCM),
    CompandingLaw.ALAW: _alaw_encode_array(_ALL_PCM),
}
_DECODE_LUT = {
    CompandingLaw.MULAW: _mulaw_decode_array(_ALL_CODES),
    CompandingLaw.ALAW: _alaw_decode_array(_ALL_CODES),
}
for _lut in (*_ENCODE_LUT.values(), *_DECODE_LUT.values()):
    _lut.setflags(write=False)


def _check_pcm(sample: int) -> int:
    sample = int(sample)
    if not -32768 <= sample <= 32767:
        raise ValueError(f"PCM sample {sample} outside the 16-bit range")
    return sample


def _check_code(codeword: int) -> int:
    codeword = int(codeword)
    if not 0 <= codeword <= 255:
        raise ValueError(f"codeword {codeword} is not a byte")
    return codeword


def mulaw_encode(sample: int) -> int:
    return int(_ENCODE_LUT[CompandingLaw.MULAW][_check_pcm(sample) + 32768])


def mulaw_decode(codeword: int) -> int:
    return int(_DECODE_LUT[CompandingLaw.MULAW][_check_code(codeword)])


def alaw_encode(sample: int) -> int:
    return int(_ENCODE_LUT[CompandingLaw.ALAW][_check_pcm(sample) + 32768])


def alaw_decode(codeword: int) -> int:
    return int(_DECODE_LUT[CompandingLaw.ALAW][_check_code(codeword)])


def encode_frame(samples, law=CompandingLaw.MULAW) -> EncodedPayload:
    """Companded codewords for a PCM sequence, one byte per sample."""
    law = CompandingLaw.parse(law)
    pcm = np.asarray(samples)
    if pcm.size == 0:
        return EncodedPayload(b"", law)
    pcm = pcm.astype(np.int32).ravel()
    if pcm.min() < -32768 or pcm.max() > 32767:
        raise ValueError("PCM samples outside the 16-bit range")
    return EncodedPayload(_ENCODE_LUT[law][pcm + 32768].tobytes(), law)


def decode_frame(payload: EncodedPayload, law=None) -> np.ndarray:
    """Linear int16 samples for a payload.

    ``payload`` may also be raw ``bytes`` provided ``law`` is given.
    """
    if isinstance(payload, EncodedPayload):
        data, law = payload.data, payload.law if law is None else CompandingLaw.parse(law)
    else:
        if law is None:
            raise TypeError("law is required when decoding raw bytes")
        data, law = bytes(payload), CompandingLaw.parse(law)
    codes = np.frombuffer(data, dtype=np.uint8)
    return _DECODE_LUT[law][codes].copy()
