"""Time the numba-compiled kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--depths 12,16,20] [--repeat 3]

Both paths are called directly, so the ``MAXBELL_DISABLE_NUMBA`` flag does
not matter here. Outputs are compared for bit-identity before timing.
"""
import argparse
import time

import numpy as np

from maxbell import kernels
from maxbell._accel import HAVE_NUMBA


def best_of(fn, repeat):
    t = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        t.append(time.perf_counter() - t0)
    return min(t)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depths", default="12,16,20")
    ap.add_argument("--arity", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    m = a.arity
    rng = np.random.default_rng(0)
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<14}{'depth':>6}{'leaves':>10}{'numba s':>11}{'numpy s':>11}{'speedup':>9}")
    for d in (int(x) for x in a.depths.split(",")):
        vals = rng.exponential(1.0, m**d)
        sums = kernels.node_sums(vals, m, d)
        sizes = np.concatenate([np.full(m**k, float(m ** (d - k))) for k in range(d + 1)])
        avgs = sums / sizes
        cases = {
            "node_sums": (lambda: kernels._node_sums_loops(vals, m, d), lambda: kernels._node_sums_numpy(vals, m, d)),
            "maximal_pass": (lambda: kernels._maximal_pass_loops(avgs, m, d), lambda: kernels._maximal_pass_numpy(avgs, m, d)),
            "spine_order": (lambda: kernels._spine_order_loops(m, d, 0.25), lambda: kernels._spine_order_numpy(m, d, 0.25)),
        }
        for name, (fast, slow) in cases.items():
            x, y = fast(), slow()  # also warms the JIT
            same = all(np.array_equal(u, v) for u, v in zip(x, y)) if isinstance(x, tuple) else np.array_equal(x, y)
            if not same:
                raise SystemExit(f"{name}: numba and numpy outputs differ at depth {d}")
            tf, ts = best_of(fast, a.repeat), best_of(slow, a.repeat)
            print(f"{name:<14}{d:>6}{m ** d:>10}{tf:>11.4f}{ts:>11.4f}{ts / tf:>9.1f}")


if __name__ == "__main__":
    main()
