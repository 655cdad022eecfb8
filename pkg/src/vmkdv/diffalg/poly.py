"""Differential polynomials in an N-component field u with N left generic.

Scalars are polynomials in the pairings <u_i, u_j>; vectors are sums
c_k * u_k with scalar coefficients; bivectors are sums
a_kl * (u_k u_l^T - u_l u_k^T) with k < l.  Coefficients are exact
``Fraction`` values and every container is kept in canonical form, so two
polynomials are equal iff their term dictionaries are equal.
"""

from __future__ import annotations

from fractions import Fraction
from collections import namedtuple


class Pairing(namedtuple("_Pairing", "i j")):
    """The inner product <u_i, u_j>, stored with i <= j."""

    __slots__ = ()

    def __new__(cls, i: int, j: int):
        if i < 0 or j < 0:
            raise ValueError("derivative orders must be non-negative")
        return super().__new__(cls, i, j) if i <= j else super().__new__(cls, j, i)

    @classmethod
    def of(cls, i: int, j: int) -> "Pairing":
        return cls(i, j)

    @property
    def weight(self) -> int:
        return self.i + self.j + 2


# A monomial is a sorted tuple of pairings (a multiset); () is the constant 1.
Monomial = tuple


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


def mono_weight(m: Monomial) -> int:
    return sum(p.i + p.j + 2 for p in m)


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("floating point coefficients are not allowed; use Fraction")
    return Fraction(c)


def _accumulate(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class _Poly:
    """Shared canonical-dictionary machinery; subclasses fix the key shape."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, c in terms.items():
                key = self._canonical_key(key)
                clean[key] = clean.get(key, 0) + _frac(c)
            clean = {k: v for k, v in clean.items() if v}
        self.terms = clean

    @classmethod
    def _raw(cls, terms: dict):
        # trusted constructor: keys canonical, no zero values
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @staticmethod
    def _canonical_key(key):
        return key

    @classmethod
    def zero(cls):
        return cls._raw({})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.terms
        return type(self) is type(other) and self.terms == other.terms

    def __hash__(self):
        return hash((type(self).__name__, frozenset(self.terms.items())))

    def __neg__(self):
        return self._raw({k: -c for k, c in self.terms.items()})

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        if type(other) is not type(self):
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            _accumulate(out, k, c)
        return self._raw(out)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            _accumulate(out, k, -c)
        return self._raw(out)

    def scale(self, c):
        c = _frac(c)
        if not c:
            return self.zero()
        return self._raw({k: v * c for k, v in self.terms.items()})

    def _mono_of(self, key) -> Monomial:
        raise NotImplementedError

    def _base_weight(self, key) -> int:
        raise NotImplementedError

    def weights(self) -> set:
        return {self._base_weight(k) + mono_weight(self._mono_of(k)) for k in self.terms}

    def weight(self) -> int:
        """Scaling weight of a homogeneous polynomial (0 for the zero polynomial)."""
        ws = self.weights()
        if len(ws) > 1:
            raise ValueError(f"polynomial is not homogeneous (weights {sorted(ws)})")
        return ws.pop() if ws else 0

    def is_homogeneous(self) -> bool:
        return len(self.weights()) <= 1

    def homogeneous_components(self) -> dict:
        parts: dict = {}
        for k, c in self.terms.items():
            w = self._base_weight(k) + mono_weight(self._mono_of(k))
            parts.setdefault(w, {})[k] = c
        return {w: self._raw(t) for w, t in sorted(parts.items())}

    def max_order(self) -> int:
        """Highest derivative order of u appearing, or -1 if none does."""
        best = -1
        for k in self.terms:
            for p in self._mono_of(k):
                best = max(best, p.j)
            best = max(best, self._key_order(k))
        return best

    def _key_order(self, key) -> int:
        return -1

    def __str__(self):
        from .textio import format_poly

        return format_poly(self)

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"


class ScalarPoly(_Poly):
    """Polynomial in the pairings <u_i, u_j>; keys are monomials."""

    __slots__ = ()

    @staticmethod
    def _canonical_key(key):
        return tuple(sorted(Pairing.of(*p) for p in key))

    @classmethod
    def const(cls, c) -> "ScalarPoly":
        c = _frac(c)
        return cls._raw({(): c} if c else {})

    @classmethod
    def pairing(cls, i: int, j: int) -> "ScalarPoly":
        return cls._raw({(Pairing.of(i, j),): Fraction(1)})

    def _mono_of(self, key):
        return key

    def _base_weight(self, key):
        return 0

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, ScalarPoly):
            out: dict = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    _accumulate(out, mono_mul(m1, m2), c1 * c2)
            return ScalarPoly._raw(out)
        if isinstance(other, VectorPoly):
            out = {}
            for m1, c1 in self.terms.items():
                for (k, m2), c2 in other.terms.items():
                    _accumulate(out, (k, mono_mul(m1, m2)), c1 * c2)
            return VectorPoly._raw(out)
        if isinstance(other, BivectorPoly):
            out = {}
            for m1, c1 in self.terms.items():
                for (k, l, m2), c2 in other.terms.items():
                    _accumulate(out, (k, l, mono_mul(m1, m2)), c1 * c2)
            return BivectorPoly._raw(out)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e: int):
        out = ScalarPoly.const(1)
        for _ in range(e):
            out = out * self
        return out


class VectorPoly(_Poly):
    """Sum of c_k * u_k; keys are (k, monomial)."""

    __slots__ = ()

    @staticmethod
    def _canonical_key(key):
        k, m = key
        return (k, ScalarPoly._canonical_key(m))

    @classmethod
    def u(cls, k: int = 0) -> "VectorPoly":
        return cls._raw({(k, ()): Fraction(1)})

    def _mono_of(self, key):
        return key[1]

    def _base_weight(self, key):
        return key[0] + 1

    def _key_order(self, key):
        return key[0]

    def coefficients(self) -> dict:
        """Group terms as {k: ScalarPoly coefficient of u_k}."""
        out: dict = {}
        for (k, m), c in self.terms.items():
            out.setdefault(k, {})[m] = c
        return {k: ScalarPoly._raw(t) for k, t in sorted(out.items())}

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, ScalarPoly):
            return other * self
        return NotImplemented

    __rmul__ = __mul__


class BivectorPoly(_Poly):
    """Sum of a_kl * (u_k u_l^T - u_l u_k^T) over k < l; keys are (k, l, monomial)."""

    __slots__ = ()

    def __init__(self, terms=None):
        signed = {}
        for (k, l, m), c in (terms or {}).items():
            if k == l:
                continue
            if k > l:
                k, l, c = l, k, -_frac(c)
            key = (k, l, ScalarPoly._canonical_key(m))
            signed[key] = signed.get(key, 0) + _frac(c)
        super().__init__(signed)

    @staticmethod
    def _canonical_key(key):
        return key

    @classmethod
    def wedge_basis(cls, k: int, l: int) -> "BivectorPoly":
        return cls({(k, l, ()): 1})

    def _mono_of(self, key):
        return key[2]

    def _base_weight(self, key):
        return key[0] + key[1] + 2

    def _key_order(self, key):
        return key[1]

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, ScalarPoly):
            return other * self
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, VectorPoly):
            return apply_bivector(self, other)
        return NotImplemented


def dot(a: VectorPoly, b: VectorPoly) -> ScalarPoly:
    """Pairing contraction <a, b>."""
    out: dict = {}
    for (k, m1), c1 in a.terms.items():
        for (l, m2), c2 in b.terms.items():
            m = mono_mul(mono_mul(m1, m2), (Pairing.of(k, l),))
            _accumulate(out, m, c1 * c2)
    return ScalarPoly._raw(out)


def wedge(a: VectorPoly, b: VectorPoly) -> BivectorPoly:
    """The antisymmetric product a b^T - b a^T."""
    out: dict = {}
    for (k, m1), c1 in a.terms.items():
        for (l, m2), c2 in b.terms.items():
            if k == l:
                continue
            c = c1 * c2
            if k > l:
                k_, l_, c = l, k, -c
            else:
                k_, l_ = k, l
            _accumulate(out, (k_, l_, mono_mul(m1, m2)), c)
    return BivectorPoly._raw(out)


def apply_bivector(w: BivectorPoly, v: VectorPoly) -> VectorPoly:
    """Matrix-vector product: (u_k u_l^T - u_l u_k^T) u_m = <u_l,u_m> u_k - <u_k,u_m> u_l."""
    out: dict = {}
    for (k, l, m1), c1 in w.terms.items():
        for (j, m2), c2 in v.terms.items():
            m = mono_mul(m1, m2)
            c = c1 * c2
            _accumulate(out, (k, mono_mul(m, (Pairing.of(l, j),))), c)
            _accumulate(out, (l, mono_mul(m, (Pairing.of(k, j),))), -c)
    return VectorPoly._raw(out)


def bivector_bracket(x: BivectorPoly, y: BivectorPoly) -> BivectorPoly:
    """Matrix commutator of two bivectors, again a bivector."""
    out: dict = {}

    def put(a, b, m, c):
        if a == b:
            return
        if a > b:
            a, b, c = b, a, -c
        _accumulate(out, (a, b, m), c)

    for (a, b, m1), c1 in x.terms.items():
        for (c_, d, m2), c2 in y.terms.items():
            m = mono_mul(m1, m2)
            c = c1 * c2
            # [a^b, c^d] = <b,c> a^d - <b,d> a^c - <a,c> b^d + <a,d> b^c
            put(a, d, mono_mul(m, (Pairing.of(b, c_),)), c)
            put(a, c_, mono_mul(m, (Pairing.of(b, d),)), -c)
            put(b, d, mono_mul(m, (Pairing.of(a, c_),)), -c)
            put(b, c_, mono_mul(m, (Pairing.of(a, d),)), c)
    return BivectorPoly._raw(out)


def u(k: int = 0) -> VectorPoly:
    return VectorPoly.u(k)


def pairing(i: int, j: int) -> ScalarPoly:
    return ScalarPoly.pairing(i, j)
