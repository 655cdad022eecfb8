"""Total derivative, formal integration and evolutionary derivatives."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .poly import (
    BivectorPoly,
    Pairing,
    ScalarPoly,
    VectorPoly,
    _accumulate,
    dot,
    mono_mul,
    wedge,
)


class NotExact(ValueError):
    """The polynomial is not a total x-derivative of a differential polynomial."""


# -- total derivative ------------------------------------------------------


@lru_cache(maxsize=None)
def _dx_monomial(m: tuple) -> tuple:
    out: dict = {}
    for pos, p in enumerate(m):
        rest = m[:pos] + m[pos + 1:]
        for q in (Pairing.of(p.i + 1, p.j), Pairing.of(p.i, p.j + 1)):
            _accumulate(out, mono_mul(rest, (q,)), 1)
    return tuple(out.items())


def d_x(p):
    """Total x-derivative, D_x u_k = u_{k+1}, extended by the Leibniz rule."""
    out: dict = {}
    if isinstance(p, ScalarPoly):
        for m, c in p.terms.items():
            for m2, c2 in _dx_monomial(m):
                _accumulate(out, m2, c * c2)
        return ScalarPoly._raw(out)
    if isinstance(p, VectorPoly):
        for (k, m), c in p.terms.items():
            for m2, c2 in _dx_monomial(m):
                _accumulate(out, (k, m2), c * c2)
            _accumulate(out, (k + 1, m), c)
        return VectorPoly._raw(out)
    if isinstance(p, BivectorPoly):
        for (k, l, m), c in p.terms.items():
            for m2, c2 in _dx_monomial(m):
                _accumulate(out, (k, l, m2), c * c2)
            if k + 1 < l:
                _accumulate(out, (k + 1, l, m), c)
            _accumulate(out, (k, l + 1, m), c)
        return BivectorPoly._raw(out)
    raise TypeError(f"cannot differentiate {type(p).__name__}")


def d_x_power(p, n: int):
    for _ in range(n):
        p = d_x(p)
    return p


# -- graded monomial bases ---------------------------------------------------


@lru_cache(maxsize=None)
def scalar_monomials(weight: int) -> tuple:
    """All pairing monomials of the given scaling weight (the constant for 0)."""
    if weight == 0:
        return ((),)
    if weight < 2:
        return ()
    pairs = sorted(Pairing.of(i, w - 2 - i) for w in range(2, weight + 1) for i in range(0, (w - 2) // 2 + 1))
    out = []

    def rec(start, remaining, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for idx in range(start, len(pairs)):
            p = pairs[idx]
            if p.weight <= remaining:
                acc.append(p)
                rec(idx, remaining - p.weight, acc)
                acc.pop()

    rec(0, weight, [])
    return tuple(out)


def basis(kind: type, weight: int) -> tuple:
    """Term keys spanning the homogeneous polynomials of ``kind`` at ``weight``."""
    if kind is ScalarPoly:
        return scalar_monomials(weight)
    if kind is VectorPoly:
        return tuple((k, m) for k in range(weight) for m in scalar_monomials(weight - k - 1))
    if kind is BivectorPoly:
        return tuple(
            (k, l, m)
            for l in range(weight - 1)
            for k in range(l)
            if k + l + 2 <= weight
            for m in scalar_monomials(weight - k - l - 2)
        )
    raise TypeError(kind)


# -- formal integration ----------------------------------------------------


def _solve_combination(columns, target: dict):
    """Exact coefficients x with sum_i x_i * columns[i] == target, or None.

    Fraction-valued sparse elimination.  Pivots are kept in creation order;
    pivot r only contains keys of pivots created after it, so one ordered
    sweep fully reduces a vector.
    """
    pivots = []  # (key, vec, combo)

    def reduce(vec, combo):
        for key, pvec, pcombo in pivots:
            f = vec.get(key)
            if not f:
                continue
            for k, c in pvec.items():
                _accumulate(vec, k, -f * c)
            for k, c in pcombo.items():
                _accumulate(combo, k, -f * c)

    for idx, col in enumerate(columns):
        vec = dict(col)
        combo = {idx: Fraction(1)}
        reduce(vec, combo)
        if not vec:
            continue
        key = min(vec)
        inv = 1 / vec[key]
        pivots.append((key, {k: c * inv for k, c in vec.items()}, {k: c * inv for k, c in combo.items()}))

    rest = dict(target)
    solution: dict = {}
    for key, pvec, pcombo in pivots:
        f = rest.get(key)
        if not f:
            continue
        for k, c in pvec.items():
            _accumulate(rest, k, -f * c)
        for k, c in pcombo.items():
            _accumulate(solution, k, f * c)
    if rest:
        return None
    return solution


def d_x_inverse(p):
    """Antiderivative q with D_x q == p and no constant term.

    Each weight component of ``p`` is integrated against the ansatz of all
    monomials one weight lower; raises ``NotExact`` when the graded linear
    system has no solution.
    """
    kind = type(p)
    if kind not in (ScalarPoly, VectorPoly, BivectorPoly):
        raise TypeError(f"cannot integrate {kind.__name__}")
    result = kind.zero()
    for w, part in p.homogeneous_components().items():
        keys = tuple(k for k in basis(kind, w - 1) if k != ())
        columns = [d_x(kind._raw({k: Fraction(1)})).terms for k in keys]
        sol = _solve_combination(columns, part.terms)
        if sol is None:
            raise NotExact(f"weight-{w} component is not a total derivative: {part}")
        result = result + kind._raw({keys[i]: c for i, c in sol.items()})
    return result


# -- evolutionary derivative -------------------------------------------------


class _FlowJets:
    """Lazily computed D_x^k of a flow."""

    def __init__(self, flow: VectorPoly):
        self._jets = [flow]

    def __getitem__(self, k: int) -> VectorPoly:
        while len(self._jets) <= k:
            self._jets.append(d_x(self._jets[-1]))
        return self._jets[k]


def _evolve_pairing(p: Pairing, jets: _FlowJets) -> ScalarPoly:
    return dot(jets[p.i], VectorPoly.u(p.j)) + dot(VectorPoly.u(p.i), jets[p.j])


def _evolve_scalar(s: ScalarPoly, jets: _FlowJets, cache: dict) -> ScalarPoly:
    out = ScalarPoly.zero()
    for m, c in s.terms.items():
        for pos, p in enumerate(m):
            if p not in cache:
                cache[p] = _evolve_pairing(p, jets)
            rest = ScalarPoly._raw({m[:pos] + m[pos + 1:]: c})
            out = out + rest * cache[p]
    return out


def evolutionary_derivative(p, flow: VectorPoly):
    """D_t p for the evolution u_t = flow, acting by u_k -> D_x^k(flow)."""
    if not isinstance(flow, VectorPoly):
        raise TypeError("flow must be a VectorPoly")
    jets = _FlowJets(flow)
    cache: dict = {}
    if isinstance(p, ScalarPoly):
        return _evolve_scalar(p, jets, cache)
    if isinstance(p, VectorPoly):
        out = VectorPoly.zero()
        for k, coeff in p.coefficients().items():
            out = out + _evolve_scalar(coeff, jets, cache) * VectorPoly.u(k) + coeff * jets[k]
        return out
    if isinstance(p, BivectorPoly):
        out = BivectorPoly.zero()
        for (k, l, m), c in p.terms.items():
            coeff = ScalarPoly._raw({m: c})
            uk, ul = VectorPoly.u(k), VectorPoly.u(l)
            out = out + _evolve_scalar(coeff, jets, cache) * wedge(uk, ul)
            out = out + coeff * (wedge(jets[k], ul) + wedge(uk, jets[l]))
        return out
    raise TypeError(f"cannot evolve {type(p).__name__}")


# -- variational derivative --------------------------------------------------


def partial_u(s: ScalarPoly, k: int) -> VectorPoly:
    """Gradient of a scalar with respect to u_k."""
    out: dict = {}
    for m, c in s.terms.items():
        for pos, p in enumerate(m):
            rest = m[:pos] + m[pos + 1:]
            if p.i == k:
                _accumulate(out, (p.j, rest), c)
            if p.j == k:
                _accumulate(out, (p.i, rest), c)
    return VectorPoly._raw(out)


def euler_operator(s: ScalarPoly) -> VectorPoly:
    """Variational derivative sum_k (-D_x)^k dS/du_k; vanishes exactly on total derivatives."""
    out = VectorPoly.zero()
    for k in range(s.max_order() + 1):
        term = d_x_power(partial_u(s, k), k)
        out = out + (term if k % 2 == 0 else -term)
    return out
