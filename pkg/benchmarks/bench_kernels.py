"""Time the numba kernels against their pure-numpy fallbacks.

Runs each public kernel on a representative workload with both dispatch
paths and prints a small table. The numba path is warmed up first so JIT
compilation is not charged to the measurement.

Usage: python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import math
import time

import numpy as np

from spcirc import kernels, lie_closure
from spcirc.pauli import PauliString


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_apply_gate(n=14, gates=100):
    gen = np.random.default_rng(1)
    qr = [np.linalg.qr(gen.normal(size=(4, 4)) + 1j * gen.normal(size=(4, 4)))[0]
          for _ in range(gates)]
    pos = [tuple(gen.choice(n, size=2, replace=False)) for _ in range(gates)]
    psi = gen.normal(size=2**n) + 1j * gen.normal(size=2**n)
    psi /= np.linalg.norm(psi)

    def run():
        work = psi.copy()
        for g, (a, b) in zip(qr, pos):
            kernels.apply_gate_2q(work, g, int(a), int(b))

    return run


def bench_pauli_rotation(n=14, rotations=100):
    gen = np.random.default_rng(2)
    labels = []
    for _ in range(rotations):
        body = "".join(gen.choice(list("IXYZ"), size=n))
        p = PauliString.from_label(body if set(body) != {"I"} else "X" + body[1:])
        labels.append((p, gen.uniform(-math.pi, math.pi)))
    psi = gen.normal(size=2**n) + 1j * gen.normal(size=2**n)
    psi /= np.linalg.norm(psi)

    def run():
        work = psi.copy()
        for p, theta in labels:
            xd, zd = p.dense_masks()
            base = 1j ** ((p.phase_exp + p.y_count) % 4)
            kernels.pauli_rotation(work, xd, zd, complex(base), theta)

    return run


def bench_transfer(n=12, layers=8):
    gen = np.random.default_rng(3)
    t = gen.normal(size=(9, 9))
    dims = [2] + [3] * (n - 1)
    v = gen.normal(size=int(np.prod(dims)))

    def run():
        for _ in range(layers):
            for bond in range(1, n - 1):
                left = int(np.prod(dims[: bond - 1] or [1]))
                right = int(np.prod(dims[bond + 1:] or [1]))
                din = dims[bond - 1] * dims[bond]
                block = t[:din, :din].T.copy()
                kernels.transfer_apply(v, block, left, din, right)

    return run


def bench_closure(n=6):
    gens = lie_closure.theorem1_generators(n)

    def run():
        lie_closure.closure(gens)

    return run


BENCHES = [
    ("apply_gate_2q (n=14, 100 gates)", bench_apply_gate),
    ("pauli_rotation (n=14, 100 rotations)", bench_pauli_rotation),
    ("transfer_apply (n=12, 8 layers)", bench_transfer),
    ("lie closure (n=6, dim 2080)", bench_closure),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not kernels.HAS_NUMBA:
        print("numba unavailable (or disabled); timing the numpy path only")

    rows = []
    for name, make in BENCHES:
        run = make()
        timings = {}
        for use_numba in ([True, False] if kernels.HAS_NUMBA else [False]):
            kernels.USE_NUMBA = use_numba
            run()  # warm-up: JIT compile / cache fill
            timings[use_numba] = best_of(run, args.repeats)
        kernels.USE_NUMBA = kernels.HAS_NUMBA
        rows.append((name, timings))

    width = max(len(name) for name, _ in rows)
    if kernels.HAS_NUMBA:
        print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
        for name, t in rows:
            ratio = t[False] / t[True]
            print(f"{name:<{width}}  {t[True]*1e3:>8.2f}ms  {t[False]*1e3:>8.2f}ms  "
                  f"{ratio:>7.2f}x")
    else:
        print(f"{'kernel':<{width}}  {'numpy':>10}")
        for name, t in rows:
            print(f"{name:<{width}}  {t[False]*1e3:>8.2f}ms")


if __name__ == "__main__":
    main()
