"""Benchmark the compiled measurement kernel against the numpy fallback.

Runs the same two-tone measurement through both backends at several record
lengths, reports wall time and speedup, and cross-checks that every measured
bin agrees to numerical precision. Usage:

    python3 benchmarks/bench_kernel.py [--repeats 5] [--sizes 65536,262144,1048576]
"""

from __future__ import annotations

import argparse
import math
import time

from rxchain.twotone import design_nonlinearity, simulate_two_tone
from rxchain.twotone.kernel import COMPILED_AVAILABLE, available_backends

FS = 1.024e9
F1 = 50e6
F2 = 51e6


def _time_backend(model, backend: str, num_samples: int, repeats: int):
    best = math.inf
    meas = None
    for _ in range(repeats):
        start = time.perf_counter()
        meas = simulate_two_tone(
            model, F1, F2, -40.0,
            sample_rate_hz=FS, num_samples=num_samples, backend=backend,
        )
        best = min(best, time.perf_counter() - start)
    return best, meas


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeats", type=int, default=5, help="take the best of N runs")
    parser.add_argument(
        "--sizes", default="65536,262144,1048576",
        help="comma-separated record lengths",
    )
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"backends available: {', '.join(available_backends())}")
    if not COMPILED_AVAILABLE:
        print("compiled kernel not built; timing the numpy fallback only")

    model = design_nonlinearity(10.0, 20.0)
    header = f"{'samples':>10} {'numpy_s':>10} {'compiled_s':>12} {'speedup':>9} {'max_delta_db':>14}"
    print(header)
    for n in sizes:
        t_np, m_np = _time_backend(model, "numpy", n, args.repeats)
        if COMPILED_AVAILABLE:
            t_c, m_c = _time_backend(model, "compiled", n, args.repeats)
            delta = max(
                abs(m_c.powers_dbm[f] - m_np.powers_dbm[f]) for f in m_np.powers_dbm
            )
            print(f"{n:>10} {t_np:>10.4f} {t_c:>12.4f} {t_np / t_c:>8.2f}x {delta:>14.3e}")
        else:
            print(f"{n:>10} {t_np:>10.4f} {'-':>12} {'-':>9} {'-':>14}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
