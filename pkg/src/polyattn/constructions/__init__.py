"""Explicit attention instances: function composition and root-finding."""
from .composition import (
    CompositionEncoding,
    CompositionInstance,
    build_chain_polynomial,
    encode_composition,
    random_composition,
    solve_composition,
)
from .genpoly import GeneralPolynomial, parse_general
from .rootfinding import (
    MATCH3,
    RootFindingInstance,
    brute_force_roots,
    derive_h_for_p,
    encode_root_finding,
    solve_root_finding,
)

__all__ = [
    "CompositionEncoding", "CompositionInstance", "build_chain_polynomial", "encode_composition",
    "random_composition", "solve_composition", "GeneralPolynomial", "parse_general", "MATCH3",
    "RootFindingInstance", "brute_force_roots", "derive_h_for_p", "encode_root_finding",
    "solve_root_finding",
]
