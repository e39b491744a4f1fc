import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CYCLE4, H2, STRASSEN, TENSOR3, TREE7, max_abs, uniform
from oracles import naive_poly_attention, softmax_attention
from polyattn import (
    AttentionInputs,
    attend_bruteforce,
    attend_cycle,
    attend_exact,
    attend_tree,
    parse_polynomial,
)
from polyattn.errors import AdmissibilityError, BudgetError, ExponentOverflowError, ShapeError
from polyattn.exact_engines import random_inputs
from polyattn.rng import SplitMix64

# frozen from scalar arithmetic: (e*1 + 1*2) / (e + 1)
SPEC_EXAMPLE = 1.2689414213699951


def test_spec_example_value():
    h = parse_polynomial("x1*x2")
    inp = AttentionInputs(h, [[[1.0], [0.0]], [[1.0], [0.0]]], [[[1.0], [2.0]]], d_scale=1.0)
    assert SPEC_EXAMPLE == pytest.approx((math.e + 2) / (math.e + 1), rel=1e-15)
    for engine in (attend_bruteforce, attend_tree, attend_exact):
        assert engine(inp).matrix[0, 0] == pytest.approx(SPEC_EXAMPLE, abs=1e-14)


@pytest.mark.parametrize("text", ["x1*x2", H2, STRASSEN, TENSOR3, "x1*x2+x3*x4"])
def test_bruteforce_vs_naive(text):
    h = parse_polynomial(text)
    inp = random_inputs(h, 3, 2, SplitMix64(1))
    ref = naive_poly_attention(h.terms, h.t, inp.Q, inp.V, inp.d_scale)
    assert max_abs(attend_bruteforce(inp).matrix, ref) < 1e-13
    assert max_abs(attend_bruteforce(inp, safe=True).matrix, ref) < 1e-13


def test_single_row():
    h = parse_polynomial(STRASSEN)
    inp = random_inputs(h, 1, 3, SplitMix64(2))
    expect = inp.V[0] * inp.V[1]
    for engine in (attend_bruteforce, attend_cycle, attend_exact):
        assert max_abs(engine(inp).matrix, expect) < 1e-15


def test_zero_queries_give_uniform_average():
    h = parse_polynomial(H2)
    rng = SplitMix64(3)
    Q = [np.zeros((4, 2))] * 3
    V = [uniform(rng, (4, 2)), uniform(rng, (4, 2))]
    inp = AttentionInputs(h, Q, V)
    avg = np.mean([a * b for a in V[0] for b in V[1]], axis=0)
    for engine in (attend_bruteforce, attend_tree):
        assert max_abs(engine(inp).matrix, np.tile(avg, (4, 1))) < 1e-15


def test_self_attention_reduces_to_softmax():
    h = parse_polynomial("x1*x2")
    inp = random_inputs(h, 12, 4, SplitMix64(4))
    ref = softmax_attention(inp.Q[0], inp.Q[1], inp.V[0], 4.0)
    assert max_abs(attend_tree(inp).matrix, ref) < 1e-14


@pytest.mark.parametrize("text,n,d,engine", [
    (H2, 4, 2, attend_tree),
    (TREE7, 3, 2, attend_tree),
    (STRASSEN, 3, 2, attend_cycle),
    (CYCLE4, 3, 2, attend_cycle),
    ("x1*x2+x2*x3+x1*x4+x4*x5", 4, 2, attend_exact),
    ("x1*x2+x2*x3+x3*x1+x4*x5", 3, 2, attend_exact),
    ("x1*x2+x3*x4+x4*x5+x3*x5", 3, 2, attend_cycle),
    ("x2*x3+x3*x4", 4, 2, attend_tree),
    ("x1*x3", 4, 2, attend_tree),
    ("x1*x2*x3+x1*x4+x4*x5", 3, 2, attend_exact),
])
def test_structured_vs_bruteforce(text, n, d, engine):
    inp = random_inputs(parse_polynomial(text), n, d, SplitMix64(5))
    assert max_abs(engine(inp).matrix, attend_bruteforce(inp).matrix) < 1e-9


@pytest.mark.parametrize("text,tag", [
    (TENSOR3, "auto:brute"),
    (STRASSEN, "auto:cycle"),
    (H2, "auto:tree"),
    ("x1*x2+x2*x3+x3*x1+x4*x5", "auto:cycle+tree"),
])
def test_dispatch_tags(text, tag):
    inp = random_inputs(parse_polynomial(text), 2, 1, SplitMix64(6))
    assert attend_exact(inp).engine == tag


@pytest.mark.parametrize("engine,text", [(attend_tree, STRASSEN), (attend_tree, TENSOR3),
                                         (attend_cycle, H2), (attend_cycle, TENSOR3)])
def test_class_mismatch_rejected(engine, text):
    inp = random_inputs(parse_polynomial(text), 2, 1, SplitMix64(7))
    with pytest.raises(AdmissibilityError):
        engine(inp)


def test_budget(monkeypatch):
    inp = random_inputs(parse_polynomial(TENSOR3), 11, 1, SplitMix64(8))
    monkeypatch.setenv("POLYATTN_BUDGET", "100")
    with pytest.raises(BudgetError):
        attend_bruteforce(inp)
    monkeypatch.setenv("POLYATTN_BUDGET", "121")
    attend_bruteforce(inp)


def test_overflow_rejected_with_value():
    h = parse_polynomial("x1*x2")
    Q = [np.full((2, 1), 30.0), np.full((2, 1), 30.0)]
    inp = AttentionInputs(h, Q, [np.ones((2, 1))], d_scale=1.0)
    for engine in (attend_bruteforce, attend_tree):
        with pytest.raises(ExponentOverflowError) as err:
            engine(inp)
        assert err.value.value == pytest.approx(900.0)
    out = attend_bruteforce(inp, safe=True).matrix
    assert np.allclose(out, 1.0)


def test_input_validation():
    h = parse_polynomial(H2)
    with pytest.raises(ShapeError):
        AttentionInputs(h, [np.ones((2, 2))] * 2, [np.ones((2, 2))] * 2)
    with pytest.raises(ShapeError):
        AttentionInputs(h, [np.ones((2, 2))] * 3, [np.ones((2, 2)), np.ones((3, 2))])
    with pytest.raises(ShapeError):
        AttentionInputs(h, [np.ones((2, 2))] * 3, [np.ones((2, 2))] * 2, d_scale=0)
    assert AttentionInputs(h, [np.ones((2, 5))] * 3, [np.ones((2, 5))] * 2).d_scale == 5.0


def test_denominators_are_weight_sums():
    h = parse_polynomial(H2)
    inp = random_inputs(h, 3, 2, SplitMix64(9))
    den = attend_bruteforce(inp).denominators
    Q1, Q2, Q3 = inp.Q
    for l1 in range(3):
        w = sum(math.exp((Q1[l1] @ Q2[a] + Q2[a] @ Q3[b]) / 2.0) for a in range(3) for b in range(3))
        assert den[l1] == pytest.approx(w, rel=1e-14)
    assert np.allclose(attend_tree(inp).denominators, den, rtol=1e-13)


# -- properties ---------------------------------------------------------------

POLYS = ["x1*x2", H2, STRASSEN, CYCLE4, TENSOR3, "x1*x2+x2*x3+x1*x4", "x1*x2+x3*x4"]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(POLYS), st.integers(1, 5), st.integers(1, 3), st.integers(0, 2**32))
def test_oracle_equivalence(text, n, d, seed):
    inp = random_inputs(parse_polynomial(text), n, d, SplitMix64(seed))
    assert max_abs(attend_exact(inp).matrix, attend_bruteforce(inp).matrix) <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(POLYS), st.integers(1, 5), st.integers(1, 3), st.integers(0, 2**32))
def test_all_ones_values_normalize(text, n, d, seed):
    h = parse_polynomial(text)
    inp = random_inputs(h, n, d, SplitMix64(seed))
    inp = AttentionInputs(h, inp.Q, [np.ones((n, d))] * (h.t - 1))
    for engine in (attend_bruteforce, attend_exact):
        assert np.max(np.abs(engine(inp).matrix - 1.0)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(POLYS), st.integers(2, 5), st.integers(0, 2**32))
def test_query_permutation_equivariance(text, n, seed):
    h = parse_polynomial(text)
    rng = SplitMix64(seed)
    inp = random_inputs(h, n, 2, rng)
    perm = rng.permutation(n)
    permuted = AttentionInputs(h, [inp.Q[0][perm]] + inp.Q[1:], inp.V)
    assert max_abs(attend_exact(permuted).matrix, attend_exact(inp).matrix[perm]) < 1e-13


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(POLYS), st.integers(1, 4), st.integers(0, 2**32))
def test_output_within_hull_of_products(text, n, seed):
    h = parse_polynomial(text)
    inp = random_inputs(h, n, 2, SplitMix64(seed))
    prods = inp.V[0]
    for V in inp.V[1:]:
        prods = (prods[:, None, :] * V[None, :, :]).reshape(-1, 2)
    out = attend_exact(inp).matrix
    assert np.all(out >= prods.min(axis=0) - 1e-12)
    assert np.all(out <= prods.max(axis=0) + 1e-12)
