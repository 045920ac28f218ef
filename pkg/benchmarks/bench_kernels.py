"""Compiled vs pure-Python simplex kernel on the LP shapes the attack
optimizers produce, plus a larger random batch.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from cowlab import attack
from cowlab.optim import BACKEND, LinearProgram, solve_lp
from cowlab.optim import _simplex_py, lp as lp_mod
from cowlab.params import ExperimentalParams


def attack_lps():
    p = ExperimentalParams(0.06, 0.155, 0.9, 0.22, 0.1625)
    click, coin = attack.coincidence_lp_vectors(p)
    m = click.size // 2
    a = np.vstack([click, np.r_[np.ones(m), np.zeros(m)], np.r_[np.zeros(m), np.ones(m)]])
    out = [LinearProgram.nonneg(coin, a, [g, 1.0, 1.0]) for g in np.logspace(-6, -3, 20)]
    lo, hi = attack.zeta_window(p)
    for z in np.linspace(lo, hi, 22)[1:-1]:
        c, d, _ = attack.decoy_block_vectors(p, z)
        out.append(LinearProgram(d, c[None, :], [1e-8], np.zeros(c.size), np.ones(c.size), maximize=True))
    return out


def random_lps(n, rows=30, cols=60, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a = rng.normal(size=(rows, cols))
        x0 = rng.uniform(0, 1, cols)
        out.append(LinearProgram(rng.normal(size=cols), a, a @ x0, np.zeros(cols), np.full(cols, 2.0)))
    return out


def bench(lps, kernel, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        objs = [solve_lp(lp, kernel=kernel).objective for lp in lps]
        best = min(best, time.perf_counter() - t)
    return best, np.array(objs)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if BACKEND != "compiled":
        print("compiled kernel not built; only the Python kernel is available")
    print(f"{'batch':12s} {'n':>4s} {'compiled ms':>12s} {'python ms':>10s} {'speedup':>8s} {'max |dobj|':>11s}")
    for name, lps in (("attack", attack_lps()), ("random30x60", random_lps(50))):
        tp, op = bench(lps, _simplex_py, args.repeat)
        if BACKEND == "compiled":
            tc, oc = bench(lps, lp_mod._kernel, args.repeat)
            print(f"{name:12s} {len(lps):4d} {1e3 * tc:12.2f} {1e3 * tp:10.2f} {tp / tc:8.1f} {np.abs(oc - op).max():11.2e}")
        else:
            print(f"{name:12s} {len(lps):4d} {'-':>12s} {1e3 * tp:10.2f}")


if __name__ == "__main__":
    main()
