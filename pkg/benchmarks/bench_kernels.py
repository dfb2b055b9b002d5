"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the cubic-family sweep on the shipped Z4xZ2 solution and the N N^T
search on every Gram matrix of the shipped modules, and checks that both
backends return identical results.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from fusionkit import _kernels
from fusionkit.dualsearch import gram_matrix
from fusionkit.fusionmodule import builtin_module, builtin_module_names
from fusionkit.izumi import build_ah_solution
from fusionkit.numeric import D, qi_to_float


def _time(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def bench_e10(repeat):
    sol = build_ah_solution()
    G = sol.group
    args = (sol.A_array(), sol.eps, np.array([complex(z) for z in sol.eta]), G.add_table, G.neg_table,
            1.0 / qi_to_float(D), 0, sol.n)
    rows = {}
    for name in ("compiled", "python"):
        if name == "compiled" and not _kernels.compiled_available():
            continue
        kern = _kernels.backend(name)
        res, t = _time(lambda: kern.e10_residuals(*args), repeat)
        rows[name] = (np.asarray(res), t)
    return rows


def bench_nnt(repeat):
    grams = [gram_matrix(builtin_module(m), k)
             for m in builtin_module_names() for k in range(builtin_module(m).size)]
    rows = {}
    for name in ("compiled", "python"):
        if name == "compiled" and not _kernels.compiled_available():
            continue
        kern = _kernels.backend(name)
        res, t = _time(lambda: [sorted(kern.nnt_search(M, int(np.trace(M)))) for M in grams], repeat)
        rows[name] = (res, t)
    return rows, len(grams)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"default backend: {_kernels.BACKEND}")
    e10 = bench_e10(args.repeat)
    nnt, count = bench_nnt(args.repeat)
    print(f"{'kernel':<28}{'backend':<10}{'median s':>10}{'speedup':>10}")
    for title, rows in (("cubic family (32768 inst.)", e10), (f"NN^T search ({count} Gram)", nnt)):
        base = rows["python"][1]
        for name, (_, t) in rows.items():
            print(f"{title:<28}{name:<10}{t:>10.4f}{base / t:>9.1f}x")
    if "compiled" in e10:
        diff = float(np.max(np.abs(e10["compiled"][0] - e10["python"][0])))
        print(f"cubic family: max |compiled - python| = {diff:.2e}")
        print(f"NN^T search: identical results = {nnt['compiled'][0] == nnt['python'][0]}")


if __name__ == "__main__":
    main()
