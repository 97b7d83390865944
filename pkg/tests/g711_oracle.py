"""Table-driven G.711 reference built from segment boundaries alone.

Each law is described by the 128 magnitude codes (segment << 4 | mantissa),
the lower edge of the input interval each code covers, and its
reconstruction value. Encoding is a bisect over the edges; no bit tricks
shared with the implementation under test.
"""

import bisect


def _mulaw_tables():
    edges, values, steps = [], [], []
    for seg in range(8):
        step = 1 << (seg + 3)
        for m in range(16):
            lo = (16 + m) * step - 132        # biased interval, unbiased edge
            edges.append(max(lo, 0))
            values.append(((2 * m + 33) << seg) * 4 - 132)
            steps.append(step)
    return edges, values, steps


def _alaw_tables():
    edges, values, steps = [], [], []
    for seg in range(8):
        step = 16 if seg < 2 else 1 << (seg + 3)
        base = 0 if seg == 0 else (16 << (seg + 3)) if seg > 1 else 256
        for m in range(16):
            lo = base + m * step
            edges.append(lo)
            values.append(lo + step // 2)
            steps.append(step)
    return edges, values, steps


MU_EDGES, MU_VALUES, MU_STEPS = _mulaw_tables()
A_EDGES, A_VALUES, A_STEPS = _alaw_tables()


def mulaw_code(x):
    """(codeword, reconstruction, step) for PCM sample x."""
    mag = min(abs(x), 32635)
    k = bisect.bisect_right(MU_EDGES, mag) - 1
    sign = 0x80 if x < 0 else 0
    code = ~(sign | k) & 0xFF
    value = -MU_VALUES[k] if x < 0 else MU_VALUES[k]
    return code, value, MU_STEPS[k]


def mulaw_value(code):
    u = ~code & 0xFF
    v = MU_VALUES[u & 0x7F]
    return -v if u & 0x80 else v


def alaw_code(x):
    # negative inputs use the one's complement, as in the ITU reference code
    mag = x if x >= 0 else ~x
    k = bisect.bisect_right(A_EDGES, mag) - 1
    sign = 0x80 if x >= 0 else 0
    code = (sign | k) ^ 0x55
    value = A_VALUES[k] if x >= 0 else -A_VALUES[k]
    return code, value, A_STEPS[k]


def alaw_value(code):
    a = code ^ 0x55
    v = A_VALUES[a & 0x7F]
    return v if a & 0x80 else -v
