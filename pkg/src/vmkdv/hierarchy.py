"""Flows of the vector mKdV hierarchy and their Lax matrices.

Lax matrices take values in so(N+2).  An element is stored by its blocks

    [[ 0,   a,  v1^T],
     [-a,   0,  v2^T],
     [-v1, -v2,  W  ]]

with ``a`` scalar, ``v1``/``v2`` vectors and ``W`` a bivector, so
skew-symmetry holds by construction for every N.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .diffalg import (
    BivectorPoly,
    ScalarPoly,
    VectorPoly,
    apply_bivector,
    bivector_bracket,
    d_x,
    d_x_inverse,
    dot,
    evaluate_numeric,
    evolutionary_derivative,
    format_poly,
    pairing,
    parse_poly,
    u,
    wedge,
)
from .verify import VerificationReport, matrix_identity_check

DEFAULT_MAX_N = 4


@dataclass(frozen=True)
class LaxCoeff:
    a: ScalarPoly = field(default_factory=ScalarPoly.zero)
    v1: VectorPoly = field(default_factory=VectorPoly.zero)
    v2: VectorPoly = field(default_factory=VectorPoly.zero)
    W: BivectorPoly = field(default_factory=BivectorPoly.zero)

    def _map(self, fn) -> "LaxCoeff":
        return LaxCoeff(fn(self.a), fn(self.v1), fn(self.v2), fn(self.W))

    def __add__(self, other: "LaxCoeff") -> "LaxCoeff":
        return LaxCoeff(self.a + other.a, self.v1 + other.v1, self.v2 + other.v2, self.W + other.W)

    def __sub__(self, other: "LaxCoeff") -> "LaxCoeff":
        return self + (-other)

    def __neg__(self) -> "LaxCoeff":
        return self._map(lambda p: -p)

    def __mul__(self, s) -> "LaxCoeff":
        """Multiply every block by a scalar polynomial or a rational."""
        return self._map(lambda p: s * p if isinstance(s, ScalarPoly) else p.scale(s))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not (self.a or self.v1 or self.v2 or self.W)

    def bracket(self, other: "LaxCoeff") -> "LaxCoeff":
        """Matrix commutator [self, other] in block form."""
        a, v1, v2, W = self.a, self.v1, self.v2, self.W
        b, w1, w2, Z = other.a, other.v1, other.v2, other.W
        return LaxCoeff(
            a=dot(w1, v2) - dot(v1, w2),
            v1=a * w2 - b * v2 - apply_bivector(Z, v1) + apply_bivector(W, w1),
            v2=b * v1 - a * w1 - apply_bivector(Z, v2) + apply_bivector(W, w2),
            W=bivector_bracket(W, Z) - wedge(v1, w1) - wedge(v2, w2),
        )

    def d_x(self) -> "LaxCoeff":
        return self._map(d_x)

    def d_x_inverse(self) -> "LaxCoeff":
        return self._map(d_x_inverse)

    def evolve(self, flow: VectorPoly) -> "LaxCoeff":
        return self._map(lambda p: evolutionary_derivative(p, flow))

    def max_order(self) -> int:
        return max(p.max_order() for p in (self.a, self.v1, self.v2, self.W))

    def numeric(self, jet) -> np.ndarray:
        """Full (N+2)x(N+2) matrix at a single-point jet of shape (m+1, N)."""
        jet = np.asarray(jet, dtype=float)
        n = jet.shape[1]
        m = np.zeros((n + 2, n + 2))
        a = float(evaluate_numeric(self.a, jet))
        v1 = evaluate_numeric(self.v1, jet)
        v2 = evaluate_numeric(self.v2, jet)
        m[0, 1], m[1, 0] = a, -a
        m[0, 2:], m[2:, 0] = v1, -v1
        m[1, 2:], m[2:, 1] = v2, -v2
        m[2:, 2:] = evaluate_numeric(self.W, jet)
        return m

    def to_json(self) -> dict:
        return {
            "a": format_poly(self.a),
            "v1": format_poly(self.v1),
            "v2": format_poly(self.v2),
            "W": format_poly(self.W),
        }

    @classmethod
    def from_json(cls, data: dict) -> "LaxCoeff":
        return cls(
            parse_poly(data.get("a", "0"), ScalarPoly),
            parse_poly(data.get("v1", "0"), VectorPoly),
            parse_poly(data.get("v2", "0"), VectorPoly),
            parse_poly(data.get("W", "0"), BivectorPoly),
        )


J_COEFF = LaxCoeff(a=ScalarPoly.const(1))
U_COEFF = LaxCoeff(v2=u(0))


class LaxMatrix:
    """Polynomial in the spectral parameter with LaxCoeff coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict | None = None):
        self.coeffs = {d: c for d, c in (coeffs or {}).items() if not c.is_zero()}

    def __eq__(self, other):
        return isinstance(other, LaxMatrix) and self.coeffs == other.coeffs

    def __add__(self, other: "LaxMatrix") -> "LaxMatrix":
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            out[d] = out[d] + c if d in out else c
        return LaxMatrix(out)

    def __neg__(self) -> "LaxMatrix":
        return LaxMatrix({d: -c for d, c in self.coeffs.items()})

    def __sub__(self, other: "LaxMatrix") -> "LaxMatrix":
        return self + (-other)

    def shift(self, k: int) -> "LaxMatrix":
        """Multiply by lambda**k."""
        return LaxMatrix({d + k: c for d, c in self.coeffs.items()})

    def bracket(self, other: "LaxMatrix") -> "LaxMatrix":
        out: dict = {}
        for d1, c1 in self.coeffs.items():
            for d2, c2 in other.coeffs.items():
                term = c1.bracket(c2)
                d = d1 + d2
                out[d] = out[d] + term if d in out else term
        return LaxMatrix(out)

    def d_x(self) -> "LaxMatrix":
        return LaxMatrix({d: c.d_x() for d, c in self.coeffs.items()})

    def evolve(self, flow: VectorPoly) -> "LaxMatrix":
        return LaxMatrix({d: c.evolve(flow) for d, c in self.coeffs.items()})

    def degree(self) -> int:
        return max(self.coeffs) if self.coeffs else -1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, d: int) -> LaxCoeff:
        return self.coeffs.get(d, LaxCoeff())

    def max_order(self) -> int:
        return max((c.max_order() for c in self.coeffs.values()), default=-1)

    def numeric(self, lam: complex, jet) -> np.ndarray:
        jet = np.asarray(jet, dtype=float)
        n = jet.shape[1]
        out = np.zeros((n + 2, n + 2), dtype=complex)
        for d, c in self.coeffs.items():
            out += lam**d * c.numeric(jet)
        return out

    def to_json(self) -> dict:
        return {str(d): self.coeffs[d].to_json() for d in sorted(self.coeffs, reverse=True)}

    @classmethod
    def from_json(cls, data: dict) -> "LaxMatrix":
        return cls({int(d): LaxCoeff.from_json(c) for d, c in data.items()})

    def __repr__(self):
        return f"LaxMatrix({self.to_json()!r})"


def lax_u() -> LaxMatrix:
    """U(lambda) = lambda J + U."""
    return LaxMatrix({1: J_COEFF, 0: U_COEFF})


def recursion_apply(f: VectorPoly) -> VectorPoly:
    """R f = -f_xx - |u|^2 f - u_1 D^-1<u, f> - D^-1(u_1 f^T - f u_1^T) u."""
    u0, u1 = u(0), u(1)
    return (
        -d_x(d_x(f))
        - pairing(0, 0) * f
        - d_x_inverse(dot(u0, f)) * u1
        - apply_bivector(d_x_inverse(wedge(u1, f)), u0)
    )


class FlowTable:
    """Memoised flows u_{t_{2n+1}} = R^n u_1 and Lax matrices V_{2n+1}."""

    def __init__(self, max_n: int = DEFAULT_MAX_N):
        self.max_n = max_n
        self._flows = {0: u(1)}
        self._lax = {0: lax_u()}
        self._lock = threading.RLock()

    def _check(self, n: int) -> None:
        if n < 0:
            raise ValueError("flow index must be non-negative")
        if n > self.max_n:
            raise ValueError(f"flow index {n} exceeds the recursion cap {self.max_n}")

    def flow(self, n: int) -> VectorPoly:
        self._check(n)
        with self._lock:
            if n not in self._flows:
                self._flows[n] = recursion_apply(self.flow(n - 1))
            return self._flows[n]

    def lax_v(self, n: int) -> LaxMatrix:
        self._check(n)
        with self._lock:
            if n not in self._lax:
                self._lax[n] = _next_lax(self.lax_v(n - 1), self.flow(n - 1))
            return self._lax[n]


def _next_lax(prev: LaxMatrix, prev_flow: VectorPoly) -> LaxMatrix:
    # V_{2n+1} = lambda^2 V_{2n-1} + lambda A + B with U_t built from the previous flow
    u_t = LaxCoeff(v2=prev_flow)
    s = d_x_inverse(dot(u(0), prev_flow))
    a_term = -J_COEFF.bracket(u_t) - J_COEFF * s
    u_t_x = u_t.d_x()
    b_term = -u_t_x - U_COEFF * s + u_t_x.bracket(U_COEFF).d_x_inverse()
    return prev.shift(2) + LaxMatrix({1: a_term, 0: b_term})


_default_table = FlowTable()


def default_table() -> FlowTable:
    return _default_table


def flow(n: int) -> VectorPoly:
    return _default_table.flow(n)


def lax_v(n: int) -> LaxMatrix:
    return _default_table.lax_v(n)


def zero_curvature_residual(n: int, flow_poly: VectorPoly | None = None, table: FlowTable | None = None) -> LaxMatrix:
    """D_t U(lambda) - D_x V_{2n+1} + [U(lambda), V_{2n+1}] for u_t = flow(n).

    ``flow_poly`` substitutes a different evolution (used for fault injection).
    """
    table = table or _default_table
    f = table.flow(n) if flow_poly is None else flow_poly
    v = table.lax_v(n)
    lu = lax_u()
    return lu.evolve(f) - v.d_x() + lu.bracket(v)


def flow_commutator(m: int, n: int, table: FlowTable | None = None) -> VectorPoly:
    """D_{t_m} flow(n) - D_{t_n} flow(m); zero for commuting flows."""
    table = table or _default_table
    fm, fn = table.flow(m), table.flow(n)
    return evolutionary_derivative(fn, fm) - evolutionary_derivative(fm, fn)


def reduction_q(n: int) -> np.ndarray:
    return np.diag([-1.0] + [1.0] * (n + 1))


def check_reduction_group(x: LaxMatrix, samples, jet, tolerance: float = 1e-12, name: str = "reduction group") -> VerificationReport:
    """Check the skew, reality and parity relations of a Lax matrix at sampled lambda."""
    jet = np.asarray(jet, dtype=float)
    q = reduction_q(jet.shape[1])
    return matrix_identity_check(
        lambda lam: x.numeric(lam, jet),
        ("skew", "reality", "parity"),
        samples,
        q,
        tolerance=tolerance,
        name=name,
    )


def v3_from_closed_form() -> LaxMatrix:
    """V_3 written directly as lambda^2 U(lambda) - lambda([J, U_x] + |u|^2/2 J) - U_xx - |u|^2/2 U + [U_x, U]."""
    half_norm = pairing(0, 0) * Fraction(1, 2)
    ux = U_COEFF.d_x()
    lam1 = -(J_COEFF.bracket(ux) + J_COEFF * half_norm)
    lam0 = -ux.d_x() - U_COEFF * half_norm + ux.bracket(U_COEFF)
    return lax_u().shift(2) + LaxMatrix({1: lam1, 0: lam0})
