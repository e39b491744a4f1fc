"""Poly-attention: exact and approximate engines for polynomial attention.

The exponent of the softmax is an attention polynomial ``h`` evaluated on
one row from each of ``t`` query-key matrices; see :mod:`polyattn.exact_engines`.
"""
from . import _backend
from .approx_engines import (
    ExpPolynomial,
    LowRankFactors,
    TensorReduction,
    attend_strassen_approx,
    attend_tensor_approx,
    attend_tree_approx,
    exp_approx_poly,
    lowrank_exp_factor,
    reduce_to_tensor,
)
from .errors import (
    AdmissibilityError,
    BudgetError,
    ExponentOverflowError,
    ParseError,
    PolyAttnError,
    ShapeError,
)
from .exact_engines import (
    AttentionInputs,
    AttentionOutput,
    attend_bruteforce,
    attend_cycle,
    attend_exact,
    attend_tree,
    random_inputs,
)
from .poly_core import (
    GENERAL,
    SINGLE_CYCLE,
    TREE_FOREST,
    AttentionPolynomial,
    Monomial,
    build_structure,
    classify,
    evaluate,
    parse_polynomial,
    separate_variables,
)
from .rng import SplitMix64

__version__ = "0.1.0"
BACKEND = _backend.active.NAME
