"""Exact differential polynomial algebra over an N-component field u."""

from .calculus import (
    NotExact,
    basis,
    d_x,
    d_x_inverse,
    d_x_power,
    euler_operator,
    evolutionary_derivative,
    partial_u,
    scalar_monomials,
)
from .numeric import MissingJetOrder, evaluate_numeric
from .poly import (
    BivectorPoly,
    Pairing,
    ScalarPoly,
    VectorPoly,
    apply_bivector,
    bivector_bracket,
    dot,
    pairing,
    u,
    wedge,
)
from .textio import ParseError, format_poly, parse_poly

__all__ = [
    "BivectorPoly",
    "MissingJetOrder",
    "NotExact",
    "Pairing",
    "ParseError",
    "ScalarPoly",
    "VectorPoly",
    "apply_bivector",
    "basis",
    "bivector_bracket",
    "d_x",
    "d_x_inverse",
    "d_x_power",
    "dot",
    "euler_operator",
    "evaluate_numeric",
    "evolutionary_derivative",
    "format_poly",
    "pairing",
    "parse_poly",
    "partial_u",
    "scalar_monomials",
    "u",
    "wedge",
]
