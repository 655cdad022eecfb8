"""One-soliton: Darboux matrix with poles at +-i mu, dressing, closed form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, NonRealOutput, PoleEvaluation
from .times import TimeVector, reduction_q, xi

REAL_TOL = 1e-10


@dataclass(frozen=True)
class SolitonParams:
    mu: float
    c0: float
    c: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.c))
        object.__setattr__(self, "c", c)
        if not self.mu > 0:
            raise ValueError("soliton mu must be positive")
        if abs(self.c0**2 + sum(v * v for v in c) - 1.0) > 1e-12:
            raise ValueError("soliton data must satisfy c0^2 + |c|^2 = 1")

    @classmethod
    def normalized(cls, mu: float, c0: float, c) -> "SolitonParams":
        """Scale (c0, c) onto the unit sphere."""
        c = np.asarray(c, dtype=float)
        norm = np.sqrt(c0 * c0 + c @ c)
        return cls(mu, c0 / norm, tuple(c / norm))

    @property
    def n_components(self) -> int:
        return len(self.c)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.c)

    @property
    def constant(self) -> np.ndarray:
        """C = (i, c0, c) with C^T C = 0."""
        return np.array([1j, self.c0, *self.c])


def soliton_q(params: SolitonParams, times: TimeVector) -> np.ndarray:
    """q = Psi(i mu) C = (i ch + i c0 sh, c0 ch + sh, c); components on axis 0."""
    x = np.asarray(xi(times, params.mu, "soliton"))
    ch, sh = np.cosh(x), np.sinh(x)
    out = np.empty((params.n_components + 2,) + x.shape, dtype=complex)
    out[0] = 1j * (ch + params.c0 * sh)
    out[1] = params.c0 * ch + sh
    for k, ck in enumerate(params.c):
        out[2 + k] = ck
    return out


def projector(q) -> np.ndarray:
    """Rank-one projector P = Q q q^T / (q^T Q q) for a single vector q."""
    q = np.asarray(q, dtype=complex)
    Q = reduction_q(q.shape[0] - 2)
    den = q @ Q @ q
    if abs(den) <= 1e-14 * max(1.0, float(np.vdot(q, q).real)):
        raise DegenerateDenominator("q^T Q q vanishes (lightlike q)")
    return Q @ np.outer(q, q) / den


def soliton_darboux_from_projector(P: np.ndarray, mu: float, lam: complex) -> np.ndarray:
    lam = complex(lam)
    if abs(lam - 1j * mu) < 1e-14 or abs(lam + 1j * mu) < 1e-14:
        raise PoleEvaluation(f"lambda = {lam} is a pole (+-i mu)")
    Q = reduction_q(P.shape[0] - 2)
    eye = np.eye(P.shape[0])
    return eye + 2j * mu / (lam - 1j * mu) * P - 2j * mu / (lam + 1j * mu) * (Q @ P @ Q)


def soliton_darboux(params: SolitonParams, times: TimeVector, lam: complex) -> np.ndarray:
    """M(lam) = 1 + 2i mu/(lam - i mu) P - 2i mu/(lam + i mu) Q P Q at a single point."""
    q = soliton_q(params, times)
    if q.ndim != 1:
        raise ValueError("soliton_darboux expects scalar times")
    return soliton_darboux_from_projector(projector(q), params.mu, lam)


def dressing_apply(q, mu: float, u=None) -> np.ndarray:
    """u~_j = u_j - 4 i mu q_1 q_{j+2} / (-q_1^2 + sum_{k>=2} q_k^2)."""
    q = np.asarray(q, dtype=complex)
    n = q.shape[0] - 2
    if u is None:
        u = np.zeros((n,) + q.shape[1:])
    den = -q[0] ** 2 + np.sum(q[1:] ** 2, axis=0)
    if np.any(np.abs(den) < 1e-300):
        raise DegenerateDenominator("dressing denominator vanishes")
    out = np.asarray(u) - 4j * mu * q[0] * q[2:] / den
    imag = np.max(np.abs(out.imag), initial=0.0)
    if imag > REAL_TOL:
        raise NonRealOutput(f"dressed field has imaginary part {imag:.3e}")
    return out.real


def _sech_derivatives(z, order: int) -> list:
    """[sech z, d/dz sech z, ...] via sech' = -sech tanh and tanh' = sech^2."""
    s, t = 1.0 / np.cosh(z), np.tanh(z)
    poly = {(1, 0): 1.0}  # sech^a tanh^b coefficients
    out = []
    for _ in range(order + 1):
        out.append(sum(c * s**a * t**b for (a, b), c in poly.items()))
        nxt: dict = {}
        for (a, b), c in poly.items():
            nxt[(a, b + 1)] = nxt.get((a, b + 1), 0.0) - a * c
            if b:
                nxt[(a + 2, b - 1)] = nxt.get((a + 2, b - 1), 0.0) + b * c
        poly = {k: v for k, v in nxt.items() if v}
    return out


def _sech_shift(params: SolitonParams):
    # cosh xi + c0 sinh xi = |c| cosh(xi + delta), tanh delta = c0
    norm_c = float(np.linalg.norm(params.c))
    return norm_c, (np.arctanh(params.c0) if norm_c > 0 else 0.0)


def one_soliton(params: SolitonParams, times: TimeVector) -> np.ndarray:
    """u~ = 2 mu c / (cosh xi + c0 sinh xi); shape (N, *times.shape).

    Evaluated as 2 mu (c/|c|) sech(xi + delta): the product form cancels
    badly when |c0| is close to 1.
    """
    x = np.asarray(xi(times, params.mu, "soliton"))
    norm_c, delta = _sech_shift(params)
    if norm_c == 0:
        return np.zeros((params.n_components,) + x.shape, dtype=np.result_type(x, float))
    return 2 * params.mu * np.multiply.outer(params.vector / norm_c, 1.0 / np.cosh(x + delta))


def one_soliton_x_derivatives(params: SolitonParams, times: TimeVector, order: int) -> np.ndarray:
    """Analytic jet (u, u_x, ..., d^order u/dx^order), shape (order+1, N, *shape)."""
    x = np.asarray(xi(times, params.mu, "soliton"))
    norm_c, delta = _sech_shift(params)
    shape = (order + 1, params.n_components) + x.shape
    if norm_c == 0:
        return np.zeros(shape)
    direction = params.vector / norm_c
    derivs = _sech_derivatives(x + delta, order)
    out = np.empty(shape)
    for k, d in enumerate(derivs):
        out[k] = 2 * params.mu * params.mu**k * np.multiply.outer(direction, d)
    return out


def one_soliton_time_derivative(params: SolitonParams, times: TimeVector, n: int) -> np.ndarray:
    """d u~ / d t_{2n+1} = (-1)^n mu^(2n+1) du~/dxi, by differentiating xi."""
    x = np.asarray(xi(times, params.mu, "soliton"))
    norm_c, delta = _sech_shift(params)
    if norm_c == 0:
        return np.zeros((params.n_components,) + x.shape)
    d_xi = _sech_derivatives(x + delta, 1)[1]
    scale = (-1) ** n * params.mu ** (2 * n + 1) * 2 * params.mu / norm_c
    return scale * np.multiply.outer(params.vector, d_xi)


def backlund_branch(params: SolitonParams, times: TimeVector) -> np.ndarray:
    """a_0 = (sinh xi + c0 cosh xi)/(cosh xi + c0 sinh xi) linking the vacuum to the soliton."""
    x = np.asarray(xi(times, params.mu, "soliton"))
    return (np.sinh(x) + params.c0 * np.cosh(x)) / (np.cosh(x) + params.c0 * np.sinh(x))
