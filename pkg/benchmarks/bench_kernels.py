"""Timings for the hot kernels.

    python3 benchmarks/bench_kernels.py [--classes 10F 8E]

Compares the Fincke-Pohst backends on the norm-4 shell of each coinvariant
lattice, then times the stabilizer chain of O(L) and of O(Irr).
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from coinvlat import _accel
from coinvlat.glue import table2_build
from coinvlat.lattice import _fp_setup
from coinvlat.pipeline import CLASSES, ClassContext


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_enumeration(name):
    L = table2_build(name).L.lll()
    data = _fp_setup(L.gram, [Fraction(0)] * L.rank, Fraction(4))
    D, mu, s, M, budget, _ = data
    rows = {}
    rows["python"], (xs, _) = timed(lambda: _accel._dfs_python(D, mu, s, M, budget), repeat=1)
    count = len(xs)
    if not _accel._fits_int64(D, mu, s, M, budget):
        print(f"{name:>4} rank {L.rank} norm<=4: {count:6d} vectors  python {rows['python'] * 1e3:8.1f} ms  (int64 paths not applicable)")
        return
    rows["numpy-bfs"], _ = timed(lambda: _accel._bfs_numpy(D, mu, s, M, budget))
    if _accel.HAVE_NUMBA:
        args = [np.asarray(v, np.int64) for v in (D, mu, s)] + [np.int64(M), np.int64(budget)]
        _accel._dfs_numba(*args)  # compile
        rows["numba-dfs"], _ = timed(lambda: _accel._dfs_numba(*args))
    cells = "  ".join(f"{k} {v * 1e3:8.1f} ms" for k, v in rows.items())
    print(f"{name:>4} rank {L.rank} norm<=4: {count:6d} vectors  {cells}")


def bench_groups(name):
    ctx = ClassContext(name)
    t = time.perf_counter()
    a = ctx.aut.order()
    t_aut = time.perf_counter() - t
    t = time.perf_counter()
    o = ctx.orth_irr.order
    t_irr = time.perf_counter() - t
    print(f"{name:>4} |O(L)| {a:>10d} in {t_aut:6.1f}s   |O(Irr)| {o:>16d} in {t_irr:6.1f}s")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--classes", nargs="*", default=list(CLASSES))
    ap.add_argument("--skip-groups", action="store_true")
    args = ap.parse_args()
    print(f"backend: {_accel.backend()}")
    for name in args.classes:
        bench_enumeration(name)
    if not args.skip_groups:
        for name in args.classes:
            bench_groups(name)


if __name__ == "__main__":
    main()
