"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

The first numba call of each kernel includes compilation (or a cache load) and is
reported separately.
"""
import argparse
import time

import numpy as np

from ybeb import _kernels as K
from ybeb.subasis import gellmann_basis, structure_constants


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    m8 = rng.normal(size=(4 ** 4, 4 ** 4)) + 1j * rng.normal(size=(4 ** 4, 4 ** 4))
    yield "partial_trace n=4 k=4 trace 2", lambda f: f(m8, 4, 4, [1, 3]), K.partial_trace_numpy, K.partial_trace_numba
    g = gellmann_basis(6).matrices
    yield "triple_traces n=6", lambda f: f(g), K.triple_traces_numpy, K.triple_traces_numba
    sc = structure_constants(gellmann_basis(4))
    a, b = rng.normal(size=15), rng.normal(size=15)
    yield "explicit_conditions n=4", lambda f: f(a, b, sc.f, sc.d), K.explicit_conditions_numpy, K.explicit_conditions_numba
    op = rng.normal(size=(4, 4)) + 0j
    mat = rng.normal(size=(2 ** 9, 2 ** 8)) + 0j
    yield "apply_two_site n=2 9 sites x 256 cols", lambda f: f(op, mat, 2, 9, 0, 5), K.apply_two_site_numpy, K.apply_two_site_numba


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not K._HAVE_NUMBA:
        print("numba not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':42s} {'numpy':>10s} {'numba 1st':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, call, f_np, f_nb in cases(rng):
        t0 = time.perf_counter()
        call(f_nb)
        first = time.perf_counter() - t0
        t_np = _best(lambda: call(f_np), args.repeat)
        t_nb = _best(lambda: call(f_nb), args.repeat)
        print(f"{name:42s} {t_np * 1e3:9.2f}ms {first * 1e3:9.1f}ms {t_nb * 1e3:9.2f}ms {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
