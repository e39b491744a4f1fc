"""Acceptance suite: one check per criterion, one PASS/FAIL line each.

Run standalone with ``python3 tests/test_acceptance.py`` or under pytest.
"""
import itertools
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import CYCLE4, H2, STRASSEN, TENSOR3, TREE7  # noqa: E402
from oracles import compose  # noqa: E402
from polyattn import (  # noqa: E402
    attend_bruteforce,
    attend_cycle,
    attend_exact,
    attend_strassen_approx,
    attend_tensor_approx,
    attend_tree,
    attend_tree_approx,
    evaluate,
    exp_approx_poly,
    parse_polynomial,
    reduce_to_tensor,
    separate_variables,
)
from polyattn.cli import bench_engine, loglog_slope  # noqa: E402
from polyattn.constructions import (  # noqa: E402
    brute_force_roots,
    encode_composition,
    encode_root_finding,
    parse_general,
    random_composition,
    solve_composition,
    solve_root_finding,
)
from polyattn.dense_linalg import hadamard  # noqa: E402
from polyattn.exact_engines import ENGINES, admissible_exact_engines, random_inputs  # noqa: E402
from polyattn.rng import SplitMix64  # noqa: E402

TEST_POLYS = ["x1*x2", H2, TREE7, STRASSEN, CYCLE4, TENSOR3]


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def check_oracle_equivalence():
    t0 = time.perf_counter()
    rng = SplitMix64(1)
    worst, count = 0.0, 0
    for text in TEST_POLYS:
        h = parse_polynomial(text)
        engines = [e for e in admissible_exact_engines(h) if e != "brute"]
        for _ in range(100):
            n, d = int(rng.integers(1, 8, 1)[0]), int(rng.integers(1, 5, 1)[0])
            inp = random_inputs(h, n, d, rng)
            ref = attend_bruteforce(inp).matrix
            for e in engines:
                worst = max(worst, max_abs(ENGINES[e](inp).matrix, ref))
                count += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 30.0
    return ok, f"{count} engine runs, max err {worst:.2e}, {elapsed:.1f}s"


SEPARABLE = ["x1*x2+x1*x3", "x1*x2+x2*x3+x1*x4+x4*x5", "x1*x2+x2*x3+x3*x1+x1*x4",
             "x1*x2*x3+x1*x4", "x1*x2+x3*x4", "x1*x2+x1*x3+x1*x4"]


def check_separability():
    rng = SplitMix64(2)
    worst = 0.0
    for k in range(50):
        h = parse_polynomial(SEPARABLE[k % len(SEPARABLE)])
        inp = random_inputs(h, int(rng.integers(1, 6, 1)[0]), int(rng.integers(1, 4, 1)[0]), rng)
        branches = separate_variables(h)
        assert len(branches) >= 2
        prod = None
        for b in branches:
            part = attend_bruteforce(inp.restrict(b.poly)).matrix
            prod = part if prod is None else hadamard(prod, part)
        full = attend_bruteforce(inp).matrix
        worst = max(worst, max_abs(full, prod), max_abs(attend_exact(inp).matrix, prod))
    return worst <= 1e-12, f"50 instances, max err {worst:.2e}"


def _tensor(inp, eps):
    return attend_tensor_approx(reduce_to_tensor(inp), eps, inp.d_scale)


APPROX_CASES = [("strassen", STRASSEN, attend_strassen_approx, attend_cycle),
                ("tree", H2, attend_tree_approx, attend_tree),
                ("tensor", TENSOR3, _tensor, attend_bruteforce)]


def check_approx_contract():
    t0 = time.perf_counter()
    worst, monotone = 0.0, True
    for name, text, approx, exact in APPROX_CASES:
        h = parse_polynomial(text)
        for n in (64, 128, 256):
            inp = random_inputs(h, n, 4, SplitMix64(n), 0.4)
            ref = exact(inp).matrix
            worst = max(worst, max_abs(approx(inp, 1e-6).matrix, ref))
            if n == 64:
                errs = [max_abs(approx(inp, 1e-2 / 2 ** k).matrix, ref) for k in range(14)]
                monotone &= all(b <= a for a, b in zip(errs, errs[1:]))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and monotone and elapsed < 120.0
    return ok, f"max err {worst:.2e}, halving monotone {monotone}, {elapsed:.1f}s"


SLOPE_LADDERS = [
    # name, poly, engine, sizes, d, bound, eps, accept
    ("tree", H2, "tree", [512, 1024, 2048, 4096], 8, 1.0, None, lambda s: 1.7 <= s <= 2.3),
    ("brute t=3", TENSOR3, "brute", [32, 64, 128, 256], 4, 1.0, None, lambda s: s >= 2.6),
    ("lowrank", H2, "approx-lowrank", [4096, 8192, 16384, 32768], 2, 0.4, 1e-6, lambda s: s <= 1.5),
]


def check_scaling():
    ok, parts = True, []
    for name, text, engine, sizes, d, bound, eps, accept in SLOPE_LADDERS:
        recs = bench_engine(parse_polynomial(text), engine, sizes, d, 5, 7, bound, eps)
        slope = loglog_slope(sizes, [r["wall_time_ns"] for r in recs])
        ok &= accept(slope)
        parts.append(f"{name} {slope:.2f}")
    return ok, ", ".join(parts)


def check_composition():
    rng = SplitMix64(5)
    total = correct = 0
    for r in (2, 3, 4):
        for _ in range(100):
            inst = random_composition(r, 25, rng)
            res = solve_composition(encode_composition(inst))
            correct += int(res.ok and res.value == compose(inst.f, inst.x))
            total += 1
    return correct == total, f"{correct}/{total} decoded, 51 tokens at r=2"


MATCH3 = parse_general("x1+x2+x3")


def _zero_sum_triples(S):
    return {tuple(sorted(tup)) for tup in brute_force_roots(MATCH3, S)}


def _distinct_nonzero(rng, k, bound, exclude=()):
    out = list(exclude)
    while len(out) < len(exclude) + k:
        v = int(rng.integers(-bound, bound + 1, 1)[0])
        if v != 0 and v not in out:
            out.append(v)
    return out[len(exclude):]


def planted_set(rng, n=20, bound=1000):
    while True:
        a, b = _distinct_nonzero(rng, 2, bound // 2)
        c = -(a + b)
        if c == 0 or len({a, b, c}) < 3:
            continue
        S = [a, b, c] + _distinct_nonzero(rng, n - 3, bound, exclude=[a, b, c])
        if len(_zero_sum_triples(S)) == 1:
            perm = rng.permutation(n)
            return [S[i] for i in perm], tuple(sorted((a, b, c)))


def solution_free_set(rng, n=20, bound=1000):
    while True:
        S = _distinct_nonzero(rng, n, bound)
        if not _zero_sum_triples(S):
            return S


def check_match3():
    rng = SplitMix64(6)
    agree = found_planted = none_free = 0
    for _ in range(50):
        S, triple = planted_set(rng)
        found = solve_root_finding(encode_root_finding(MATCH3, S))
        ok = found is not None and tuple(sorted(found)) == triple
        found_planted += int(ok)
        agree += int(ok and bool(brute_force_roots(MATCH3, S)))
    for _ in range(50):
        S = solution_free_set(rng)
        found = solve_root_finding(encode_root_finding(MATCH3, S))
        none_free += int(found is None)
        agree += int(found is None and not brute_force_roots(MATCH3, S))
    ok = found_planted == 50 and none_free == 50 and agree == 100
    return ok, f"planted found {found_planted}/50, none reported {none_free}/50, agreement {agree}/100"


def check_exp_poly():
    worst_ratio = 0.0
    for gamma, eps in itertools.product((0.5, 1.0, 2.0), (1e-4, 1e-6)):
        P = exp_approx_poly(gamma, eps)
        a = np.linspace(-gamma, gamma, 10_000)
        rel = float(np.max(np.abs(P(a) - np.exp(a)) / np.exp(a)))
        worst_ratio = max(worst_ratio, rel / eps)
    return worst_ratio <= 1.0, f"6 grids, worst err/eps {worst_ratio:.3f}"


def check_reduction_identity():
    rng = SplitMix64(8)
    worst = 0.0
    for text in TEST_POLYS:
        h = parse_polynomial(text)
        for _ in range(20):
            n, d = int(rng.integers(1, 5, 1)[0]), int(rng.integers(1, 5, 1)[0])
            inp = random_inputs(h, n, d, rng)
            red = reduce_to_tensor(inp)
            for _ in range(10):
                idx = rng.integers(0, n, h.t)
                prod = np.ones(red.K[0].shape[1])
                for j in range(1, h.t):
                    prod = prod * red.K[j][idx[j]]
                lhs = float(red.K[0][idx[0]] @ prod)
                rhs = evaluate(h, [inp.Q[j][idx[j]] for j in range(h.t)])
                worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-12, f"120 instances, max err {worst:.2e}"


CRITERIA = [
    (1, "oracle equivalence", check_oracle_equivalence),
    (2, "separability identity", check_separability),
    (3, "approximation contract", check_approx_contract),
    (4, "scaling exponents", check_scaling),
    (5, "function composition", check_composition),
    (6, "match3 root finding", check_match3),
    (7, "exp polynomial contract", check_exp_poly),
    (8, "reduction identity", check_reduction_identity),
]


def report(num, name, fn):
    ok, detail = fn()
    line = f"{'PASS' if ok else 'FAIL'} criterion {num} ({name}): {detail}"
    return ok, line


@pytest.mark.acceptance
@pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[c[1].replace(" ", "_") for c in CRITERIA])
def test_criterion(num, name, fn, capsys):
    ok, line = report(num, name, fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
