"""Floating-point evaluation of differential polynomials on a jet."""

from __future__ import annotations

import numpy as np

from .poly import BivectorPoly, ScalarPoly, VectorPoly


class MissingJetOrder(KeyError):
    """The jet does not supply a derivative order the polynomial needs."""


class _PairingTable:
    def __init__(self, jet):
        self.jet = jet
        self._cache = {}

    def __call__(self, p):
        val = self._cache.get(p)
        if val is None:
            val = np.sum(self.jet[p.i] * self.jet[p.j], axis=0)
            self._cache[p] = val
        return val

    def monomial(self, m):
        val = 1.0
        for p in m:
            val = val * self(p)
        return val


def evaluate_numeric(p, jet):
    """Evaluate ``p`` at a jet (u, u_1, ..., u_m).

    ``jet`` has shape (m+1, N) for a single point or (m+1, N, *pts) for
    a batch.  Scalars evaluate to shape (*pts), vectors to (N, *pts) and
    bivectors to (N, N, *pts).
    """
    jet = np.asarray(jet)
    if jet.ndim < 2:
        raise ValueError("jet must have shape (orders, N, ...)")
    need = p.max_order()
    if need >= jet.shape[0]:
        raise MissingJetOrder(f"polynomial needs u_{need}, jet stops at u_{jet.shape[0] - 1}")
    table = _PairingTable(jet)
    pts = jet.shape[2:]
    if isinstance(p, ScalarPoly):
        out = np.zeros(pts, dtype=jet.dtype)
        for m, c in p.terms.items():
            out = out + float(c) * table.monomial(m)
        return out
    if isinstance(p, VectorPoly):
        out = np.zeros(jet.shape[1:], dtype=jet.dtype)
        for (k, m), c in p.terms.items():
            out = out + (float(c) * table.monomial(m)) * jet[k]
        return out
    if isinstance(p, BivectorPoly):
        n = jet.shape[1]
        out = np.zeros((n, n) + pts, dtype=jet.dtype)
        for (k, l, m), c in p.terms.items():
            outer = np.einsum("i...,j...->ij...", jet[k], jet[l])
            out = out + (float(c) * table.monomial(m)) * (outer - np.swapaxes(outer, 0, 1))
        return out
    raise TypeError(f"cannot evaluate {type(p).__name__}")
