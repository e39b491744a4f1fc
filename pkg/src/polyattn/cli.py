"""Command-line front end: ``polyattn <compute|verify|bench|compose|roots|parse> ...``.

Exit codes: 0 success, 2 validation error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time

import numpy as np

from . import _backend
from .approx_engines import admissible_approx_engines, attend_approx
from .constructions import composition as comp
from .constructions import rootfinding as rf
from .constructions.genpoly import parse_general
from .dense_linalg import read_csv, write_csv
from .errors import AdmissibilityError, PolyAttnError, ShapeError
from .exact_engines import (
    ENGINES,
    AttentionInputs,
    admissible_exact_engines,
    attend_bruteforce,
    attend_exact,
    random_inputs,
)
from .poly_core import build_structure, parse_polynomial
from .rng import ALGORITHM, SplitMix64

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 2, 3
ENGINE_CHOICES = ["auto", "brute", "tree", "cycle", "approx-lowrank", "approx-tensor"]
PRESETS = {"match3": rf.MATCH3}


def run_engine(inp: AttentionInputs, engine: str, eps: float | None = None):
    """Dispatch after re-checking admissibility against the polynomial's class."""
    if engine.startswith("approx-"):
        if eps is None:
            raise ShapeError(f"engine {engine} needs --eps")
        if engine not in admissible_approx_engines(inp.h):
            raise AdmissibilityError(f"{engine} is not admissible for {inp.h} "
                                     f"({build_structure(inp.h).cls})")
        return attend_approx(inp, engine, eps)
    if engine not in ENGINES:
        raise ShapeError(f"unknown engine {engine!r}")
    if engine in ("tree", "cycle") and engine not in admissible_exact_engines(inp.h):
        raise AdmissibilityError(f"{engine} engine is not admissible for {inp.h} "
                                 f"({build_structure(inp.h).cls})")
    return ENGINES[engine](inp)


def _paths(text):
    return [p for p in text.split(",") if p.strip()] if text else []


def _emit(obj, out=None):
    text = json.dumps(obj, indent=None, sort_keys=False)
    print(text, file=out or sys.stdout)


def cmd_parse(args):
    h = parse_polynomial(args.poly)
    _emit(build_structure(h).to_dict())
    return EXIT_OK


def _inputs_from_args(args, h):
    qs, vs = _paths(args.q), _paths(args.v)
    if qs or vs:
        Q = [read_csv(p) for p in qs]
        V = [read_csv(p) for p in vs]
        return AttentionInputs(h, Q, V, args.dscale)
    rng = SplitMix64(args.seed)
    return random_inputs(h, args.n, args.d, rng, args.b, args.dscale)


def cmd_compute(args):
    h = parse_polynomial(args.poly)
    inp = _inputs_from_args(args, h)
    t0 = time.perf_counter_ns()
    res = run_engine(inp, args.engine, args.eps)
    elapsed = time.perf_counter_ns() - t0
    summary = {"engine": res.engine, "n": inp.n, "d": inp.d, "time_ns": elapsed,
               "backend": _backend.active.NAME}
    if args.out:
        write_csv(args.out, res.matrix)
        summary["out"] = args.out
        _emit(summary)
    else:
        buf = io.StringIO()
        np.savetxt(buf, res.matrix, delimiter=",", fmt="%.17g")
        sys.stdout.write(buf.getvalue())
        _emit(summary, sys.stderr)
    return EXIT_OK


def cmd_verify(args):
    h = parse_polynomial(args.poly)
    engines = admissible_exact_engines(h)
    if args.eps is not None:
        engines += admissible_approx_engines(h)
    if args.trials <= 0:
        print("warning: trials=0, nothing verified", file=sys.stderr)
    rng = SplitMix64(args.seed)
    worst = {e: 0.0 for e in engines}
    for _ in range(max(args.trials, 0)):
        inp = random_inputs(h, args.n, args.d, rng, args.b, args.dscale)
        ref = attend_bruteforce(inp).matrix
        for e in engines:
            got = run_engine(inp, e, args.eps).matrix
            worst[e] = max(worst[e], float(np.max(np.abs(got - ref))))
    report = {
        "poly": h.render(), "n": args.n, "d": args.d, "trials": args.trials, "tol": args.tol,
        "engines": {e: {"max_abs_err": worst[e], "pass": worst[e] <= args.tol} for e in engines},
        **SplitMix64(args.seed).metadata(),
    }
    report["pass"] = all(v["pass"] for v in report["engines"].values())
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_VERIFY


def loglog_slope(ns, times):
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(times, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def bench_engine(h, engine, sizes, d, reps, seed, bound, eps=None, d_scale=None, check=False):
    """Median-of-``reps`` wall time per size; returns a list of record dicts.

    Repetitions are interleaved across sizes (sizes inner, reps outer) so that
    slow drift in machine speed affects every size alike.
    """
    inputs = [random_inputs(h, n, d, SplitMix64(seed), bound, d_scale) for n in sizes]
    results = [run_engine(inp, engine, eps) for inp in inputs]  # warm-up, untimed
    times = [[] for _ in sizes]
    for _ in range(reps):
        for k, inp in enumerate(inputs):
            t0 = time.perf_counter_ns()
            run_engine(inp, engine, eps)
            times[k].append(max(time.perf_counter_ns() - t0, 1))
    records = []
    for n, inp, res, ts in zip(sizes, inputs, results, times):
        err = None
        if check:
            ref = attend_exact(inp).matrix if engine.startswith("approx-") else attend_bruteforce(inp).matrix
            err = float(np.max(np.abs(res.matrix - ref)))
        records.append({"engine": engine, "polynomial": h.render(), "n": n, "d": d,
                        "wall_time_ns": int(np.median(ts)), "max_abs_err": err,
                        "repetitions": reps})
    return records


def cmd_bench(args):
    h = parse_polynomial(args.poly)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes or any(s < 1 for s in sizes):
        raise ShapeError("--sizes must list positive integers")
    if sizes != sorted(sizes):
        raise ShapeError("--sizes must be ascending")
    recs = bench_engine(h, args.engine, sizes, args.d, args.reps, args.seed, args.b,
                        args.eps, args.dscale)
    cols = ["engine", "polynomial", "n", "d", "wall_time_ns", "max_abs_err", "repetitions"]
    lines = [",".join(cols)]
    for r in recs:
        lines.append(",".join("" if r[c] is None else str(r[c]) for c in cols))
    slope = loglog_slope(sizes, [r["wall_time_ns"] for r in recs]) if len(sizes) > 1 else None
    summary = {"engine": args.engine, "backend": _backend.active.NAME, "slope": slope}
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        summary["out"] = args.out
        _emit(summary)
    else:
        print("\n".join(lines))
        _emit(summary, sys.stderr)
    return EXIT_OK


def cmd_compose(args):
    A = args.scale if args.scale is not None else comp.default_scale(args.r)
    if args.r < 2 or args.n < 2:
        raise ShapeError("compose needs --r >= 2 and --n >= 2")
    if not A > math.sqrt(args.r + 2):
        raise AdmissibilityError(f"--scale {A:g} must exceed sqrt(r+2) = {math.sqrt(args.r + 2):.4f}")
    rng = SplitMix64(args.seed)
    correct, failures = 0, 0
    for _ in range(args.count):
        inst = comp.random_composition(args.r, args.n, rng)
        res = comp.solve_composition(comp.encode_composition(inst, A))
        if not res.ok:
            failures += 1
        elif res.value == inst.answer():
            correct += 1
    acc = correct / args.count if args.count else 1.0
    report = {"r": args.r, "n": args.n, "tokens": args.r * args.n + 1, "A": A, "count": args.count,
              "correct": correct, "decode_failures": failures, "accuracy": acc, "rng": ALGORITHM,
              "seed": args.seed}
    _emit(report)
    return EXIT_OK if acc == 1.0 else EXIT_VERIFY


def cmd_roots(args):
    text = PRESETS.get(args.p.strip().lower(), args.p)
    p = parse_general(text)
    S = rf.parse_set(args.set)
    inst = rf.encode_root_finding(p, S, c_gap=args.scale)
    found = rf.solve_root_finding(inst)
    brute = rf.brute_force_roots(inst.p, S)
    agree = (found is None) == (not brute)
    report = {"p": inst.p.render(), "S": S, "found": list(found) if found is not None else "none",
              "brute_force_roots": len(brute), "agree": agree, "c_gap": inst.c_gap}
    _emit(report)
    return EXIT_OK if agree else EXIT_VERIFY


def build_parser():
    ap = argparse.ArgumentParser(prog="polyattn", description="Poly-attention engines and constructions.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n=4, d=2):
        p.add_argument("--poly", required=True)
        p.add_argument("--n", type=int, default=n)
        p.add_argument("--d", type=int, default=d)
        p.add_argument("--b", type=float, default=1.0, help="entry bound B")
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--dscale", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("parse", help="print classification JSON for a polynomial")
    p.add_argument("--poly", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("compute", help="compute the attention output")
    common(p)
    p.add_argument("--q", default=None, help="comma-joined CSV paths for Q1..Qt")
    p.add_argument("--v", default=None, help="comma-joined CSV paths for V2..Vt")
    p.add_argument("--engine", choices=ENGINE_CHOICES, default="auto")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="compare engines against brute force")
    common(p, n=5, d=3)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="time an engine over a size ladder")
    common(p)
    p.add_argument("--engine", choices=ENGINE_CHOICES, default="auto")
    p.add_argument("--sizes", default="64,128,256,512")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compose", help="r-fold function composition demo")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--scale", type=float, default=None, help="encoding scale A")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("roots", help="root-finding over a finite set")
    p.add_argument("--p", default="match3", help="polynomial text or preset 'match3'")
    p.add_argument("--set", required=True, help="comma-separated distinct values")
    p.add_argument("--scale", type=float, default=None, help="gap constant c_gap")
    p.set_defaults(func=cmd_roots)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PolyAttnError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
