"""Vectorized fallback measurement kernel.

Same contract as the compiled kernel: synthesize two coherent tones on an
n-sample grid, apply y = a1*x + a3*x^3, and return the complex amplitude at
each requested bin plus the mean square of the output. Phase arguments are
reduced exactly in integer arithmetic ((k*i) mod n) before the trig call, so
bin powers are accurate down to the summation noise floor.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def measure_bins(
    a1: float,
    a3: float,
    amp1: float,
    amp2: float,
    k1: int,
    k2: int,
    bins,
    n: int,
):
    if n <= 0:
        raise ValueError("n must be positive")
    if not (0 <= k1 < n and 0 <= k2 < n):
        raise ValueError("tone bins must lie in [0, n)")
    kb = np.ascontiguousarray(bins, dtype=np.int64)
    if kb.ndim != 1:
        raise ValueError("bins must be one-dimensional")
    if np.any(kb < 0) or np.any(kb > n // 2):
        raise ValueError("bin index outside [0, n/2]")

    i = np.arange(n, dtype=np.int64)
    w = 2.0 * np.pi / n
    x = amp1 * np.cos(w * ((k1 * i) % n))
    if amp2 != 0.0:
        x = x + amp2 * np.cos(w * ((k2 * i) % n))
    y = x * (a1 + a3 * x * x)
    mean_square = float(y @ y) / n

    out = np.empty(len(kb), dtype=np.complex128)
    for j, k in enumerate(kb):
        ph = w * ((int(k) * i) % n)
        acc = complex(np.dot(y, np.cos(ph)), -float(np.dot(y, np.sin(ph))))
        scale = (1.0 if (k == 0 or 2 * k == n) else 2.0) / n
        out[j] = acc * scale
    return out, mean_square
