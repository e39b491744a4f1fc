"""Compare the compiled kernels against the numpy fallback.

Usage: python benchmarks/compare_backends.py [--reps 5] [--out results.csv]

Prints one CSV row per (workload, backend) with the median wall time and the
max-abs difference of the result from the compiled backend's result.
"""
import argparse
import sys
import time

import numpy as np

from polyattn import _backend, attend_bruteforce, attend_cycle, attend_tree, parse_polynomial
from polyattn.exact_engines import random_inputs
from polyattn.rng import SplitMix64


def median_ns(fn, reps):
    fn()
    ts = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        ts.append(time.perf_counter_ns() - t0)
    return int(np.median(ts))


def workloads():
    rng = SplitMix64(7)
    A = rng.uniform(-1, 1, (384, 384))
    B = rng.uniform(-1, 1, (384, 384))
    yield "matmul 384", lambda: _backend.active.matmul(A, B)
    yield "diag_pair 384", lambda: _backend.active.diag_pair(A, B)
    tree = random_inputs(parse_polynomial("x1*x2+x2*x3"), 1024, 8, rng)
    yield "tree n=1024", lambda: attend_tree(tree).matrix
    cyc = random_inputs(parse_polynomial("x1*x2+x1*x3+x2*x3"), 256, 4, rng)
    yield "cycle n=256", lambda: attend_cycle(cyc).matrix
    brute = random_inputs(parse_polynomial("x1*x2*x3"), 64, 4, rng)
    yield "brute t=3 n=64", lambda: attend_bruteforce(brute).matrix


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)
    if _backend.compiled is None:
        print("compiled backend not built; nothing to compare", file=sys.stderr)
        return 1
    rows = ["workload,backend,median_ns,max_abs_diff,time_vs_cython"]
    for name, fn in workloads():
        with _backend.using(_backend.compiled):
            ref = np.asarray(fn())
            t_c = median_ns(fn, args.reps)
        with _backend.using(_backend.pure):
            got = np.asarray(fn())
            t_p = median_ns(fn, args.reps)
        diff = float(np.max(np.abs(got - ref)))
        rows.append(f"{name},cython,{t_c},0,1.0")
        rows.append(f"{name},numpy,{t_p},{diff:.3g},{t_p / t_c:.3g}")
    text = "\n".join(rows)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
