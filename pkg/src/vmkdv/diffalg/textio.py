"""Canonical text form of differential polynomials.

Grammar (whitespace between tokens is ignored when parsing)::

    poly     := "0" | term (("+" | "-") term)*      leading "-" allowed
    term     := [coeff "*"] factor ("*" factor)*  |  coeff
    coeff    := INT | INT "/" INT
    factor   := "<u" INT ",u" INT ">" ["^" INT]       scalar pairing
              | "u" INT                               vector base, at most one
              | "[u" INT ",u" INT "]"                 bivector u_k u_l^T - u_l u_k^T

A term carries no base (scalar), exactly one ``uK`` (vector) or exactly
one ``[uK,uL]`` (bivector); all terms of one polynomial share a kind.
Formatting is deterministic: vector terms by decreasing derivative order,
bivector terms by decreasing total order, scalar monomials by
(number of factors, pairing indices).  Example: ``-u3 - 3/2*<u0,u0>*u1``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .poly import BivectorPoly, Pairing, ScalarPoly, VectorPoly


def _mono_text(m) -> list:
    out = []
    idx = 0
    while idx < len(m):
        p = m[idx]
        e = 1
        while idx + e < len(m) and m[idx + e] == p:
            e += 1
        out.append(f"<u{p.i},u{p.j}>" + (f"^{e}" if e > 1 else ""))
        idx += e
    return out


def _mono_sort_key(m):
    return (len(m), m)


def _term_sort_key(kind, key):
    if kind is ScalarPoly:
        return _mono_sort_key(key)
    if kind is VectorPoly:
        return (-key[0], _mono_sort_key(key[1]))
    return (-(key[0] + key[1]), -key[1], _mono_sort_key(key[2]))


def format_poly(p) -> str:
    kind = type(p)
    if not p.terms:
        return "0"
    pieces = []
    for key in sorted(p.terms, key=lambda k: _term_sort_key(kind, k)):
        c = p.terms[key]
        if kind is ScalarPoly:
            factors = _mono_text(key)
        elif kind is VectorPoly:
            factors = _mono_text(key[1]) + [f"u{key[0]}"]
        else:
            factors = _mono_text(key[2]) + [f"[u{key[0]},u{key[1]}]"]
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = str(mag) + "*" + "*".join(factors)
        pieces.append(("-" if c < 0 else "+", body))
    sign, body = pieces[0]
    text = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text


_FACTOR = re.compile(
    r"<u(?P<pi>\d+),u(?P<pj>\d+)>(?:\^(?P<pe>\d+))?$"
    r"|\[u(?P<bk>\d+),u(?P<bl>\d+)\]$"
    r"|u(?P<vk>\d+)$"
    r"|(?P<num>\d+(?:/\d+)?)$"
)


class ParseError(ValueError):
    pass


def _split_terms(text: str):
    compact = re.sub(r"\s+", "", text)
    if not compact:
        raise ParseError("empty polynomial")
    if compact[0] not in "+-":
        compact = "+" + compact
    parts = re.findall(r"([+-])([^+-]*)", compact)
    if "".join(sign + body for sign, body in parts) != compact:
        raise ParseError(f"malformed polynomial: {text!r}")
    for sign, body in parts:
        if not body:
            raise ParseError(f"dangling {sign!r} in {text!r}")
        yield (1 if sign == "+" else -1), body


def _parse_term(sign: int, body: str):
    coeff = Fraction(sign)
    mono = []
    base = None
    for pos, factor in enumerate(body.split("*")):
        m = _FACTOR.match(factor)
        if not m:
            raise ParseError(f"bad factor {factor!r}")
        if m.group("num") is not None:
            if pos != 0:
                raise ParseError(f"coefficient must lead its term: {body!r}")
            coeff *= Fraction(m.group("num"))
        elif m.group("pi") is not None:
            p = Pairing.of(int(m.group("pi")), int(m.group("pj")))
            mono.extend([p] * int(m.group("pe") or 1))
        else:
            if base is not None:
                raise ParseError(f"a term may hold at most one vector or bivector base: {body!r}")
            if m.group("vk") is not None:
                base = (VectorPoly, int(m.group("vk")))
            else:
                base = (BivectorPoly, int(m.group("bk")), int(m.group("bl")))
    mono = tuple(mono)
    if base is None:
        return ScalarPoly, mono, coeff
    if base[0] is VectorPoly:
        return VectorPoly, (base[1], mono), coeff
    return BivectorPoly, (base[1], base[2], mono), coeff


def parse_poly(text: str, kind: type | None = None):
    """Parse the canonical text form; ``kind`` forces the result type."""
    terms = [_parse_term(sign, body) for sign, body in _split_terms(text)]
    nonzero = {k for k, _, c in terms if c}
    if kind is None:
        if len(nonzero) > 1:
            raise ParseError("terms of mixed kinds")
        kind = nonzero.pop() if nonzero else ScalarPoly
    for k, _, c in terms:
        if c and k is not kind:
            raise ParseError(f"expected a {kind.__name__}, found a {k.__name__} term")
    return kind({key: c for k, key, c in terms if k is kind})
