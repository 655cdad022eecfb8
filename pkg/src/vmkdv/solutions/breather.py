"""Breathers: Darboux matrix with poles at +-mu, +-mu*, rank-s and rank-1 dressing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AxisPole, MaximalIsotropicRank, NonRealOutput, PoleEvaluation, SingularD, SingularH
from .times import TimeVector, reduction_q, rotation_block, xi

AXIS_TOL = 1e-8
SINGULAR_COND = 1e12
REAL_TOL = 1e-10


def _check_mu(mu: complex) -> complex:
    mu = complex(mu)
    if abs(mu.real) < AXIS_TOL or abs(mu.imag) < AXIS_TOL:
        raise AxisPole(f"breather pole mu = {mu} must lie off both axes")
    return mu


@dataclass(frozen=True)
class BreatherParams:
    mu: complex
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", _check_mu(self.mu))
        C = np.array(self.C, dtype=complex)
        if C.ndim == 1:
            C = C[:, None]
        C.setflags(write=False)
        object.__setattr__(self, "C", C)
        n2, s = C.shape
        if n2 < 3:
            raise ValueError("C needs N + 2 >= 3 rows")
        if s < 1 or np.linalg.matrix_rank(C) < s:
            raise ValueError("C must have full column rank")
        scale = max(1.0, float(np.max(np.abs(C))) ** 2)
        if np.max(np.abs(C.T @ C)) > 1e-12 * scale:
            raise ValueError("C must be isotropic: C^T C = 0")
        if 2 * s == n2:
            raise MaximalIsotropicRank(
                f"rank s = {s} spans a maximal isotropic subspace of C^{n2}; "
                "the B, C, D formulas do not yield an orthogonal Darboux matrix there"
            )

    @property
    def n_components(self) -> int:
        return self.C.shape[0] - 2

    @property
    def rank(self) -> int:
        return self.C.shape[1]

    @property
    def symplectic_defect(self) -> float:
        """max |C^T J C|.

        Zero for s = 1 automatically.  For s >= 2 the B, C, D dressing is a
        genuine Darboux matrix only when this vanishes: q^T J q = C^T J C
        enters the kernel condition at the pole and the F, G, H data cannot
        absorb it.
        """
        c0, c1 = self.C[0], self.C[1]
        return float(np.max(np.abs(np.outer(c0, c1) - np.outer(c1, c0)), initial=0.0))

    def gauged(self, g) -> "BreatherParams":
        """Same Grassmannian point, different representative C g."""
        return BreatherParams(self.mu, self.C @ np.asarray(g, dtype=complex))


def orthonormal_breather_params(mu: complex, n_components: int, j: int) -> BreatherParams:
    """Real part e_1, imaginary part e_{j+2} (j counted from 1)."""
    if not 1 <= j <= n_components:
        raise ValueError("component j must lie in 1..N")
    C = np.zeros(n_components + 2, dtype=complex)
    C[0] = 1.0
    C[j + 1] = 1j
    return BreatherParams(mu, C)


def compatible_breather_params(mu: complex, n_components: int, rank: int, rng=None) -> BreatherParams:
    """Random C with C^T C = 0 and C^T J C = 0, of the requested rank.

    Built from the isotropic frame e_1 + i e_3, e_4 + i e_5, ... by a random
    complex rotation of SO(2) x SO(N) (which preserves both quadratic
    constraints) and a random GL(s) gauge.
    """
    rng = np.random.default_rng(rng)
    n2 = n_components + 2
    if not 1 <= rank or 2 * rank > n_components + 1:
        raise ValueError(f"need 1 <= s and 2s <= N + 1 for this construction (N={n_components}, s={rank})")
    C = np.zeros((n2, rank), dtype=complex)
    C[0, 0], C[2, 0] = 1.0, 1j
    for k in range(1, rank):
        C[2 * k + 1, k], C[2 * k + 2, k] = 1.0, 1j
    rot = np.eye(n2, dtype=complex)
    a = complex(rng.normal(), 0.5 * rng.normal())
    rot[:2, :2] = [[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]]
    k = 0.5 * (rng.normal(size=(n_components,) * 2) + 1j * rng.normal(size=(n_components,) * 2))
    rot[2:, 2:] = _expm(k - k.T)
    g = rng.normal(size=(rank, rank)) + 1j * rng.normal(size=(rank, rank))
    return BreatherParams(mu, rot @ C @ g)


def _expm(a):
    w, v = np.linalg.eig(a)
    return v @ np.diag(np.exp(w)) @ np.linalg.inv(v)


def breather_q(params: BreatherParams, times: TimeVector) -> np.ndarray:
    """q = Psi(mu) C, batched: shape (*times.shape, N+2, s)."""
    psi = rotation_block(xi(times, params.mu, "breather"), params.n_components)
    return psi @ params.C


def _stable_frame(q):
    """Orthonormal basis of span(q) per point.

    The dressed field only depends on the column span of q (gauge q -> q g),
    and far from the core the columns of Psi C align exponentially fast.
    """
    if q.shape[-1] == 1:
        return q / np.linalg.norm(q, axis=-2, keepdims=True)
    return np.linalg.qr(q)[0]


def _h(m):
    return np.conj(np.swapaxes(m, -1, -2))


def _t(m):
    return np.swapaxes(m, -1, -2)


def breather_fgh(q, mu: complex):
    """F = q^T Q q / 2mu, G = q^dag q / (mu - mu*), H = q^dag Q q / (mu + mu*)."""
    mu = _check_mu(mu)
    q = np.asarray(q, dtype=complex)
    Q = reduction_q(q.shape[-2] - 2)
    F = _t(q) @ Q @ q / (2 * mu)
    G = _h(q) @ q / (mu - np.conj(mu))
    H = _h(q) @ Q @ q / (mu + np.conj(mu))
    return F, G, H


def _inverse(m, err, what):
    m = np.asarray(m)
    cond = np.linalg.cond(m) if m.ndim == 2 else np.linalg.cond(m).max()
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise err(f"{what} is singular (condition number {cond:.3e})")
    return np.linalg.inv(m)


def breather_bcd(F, G, H):
    """B = D G* H*^-1, C = -D* F* H*^-1, D = -(F H^-1 F* + G* H*^-1 G* - H*)^-1."""
    F, G, H = (np.asarray(m, dtype=complex) for m in (F, G, H))
    scalar = F.ndim == 0
    if scalar:
        F, G, H = (m.reshape(1, 1) for m in (F, G, H))
    Hi = _inverse(H, SingularH, "H")
    Hsi = np.conj(Hi)
    Fs, Gs, Hs = np.conj(F), np.conj(G), np.conj(H)
    D = -_inverse(F @ Hi @ Fs + Gs @ Hsi @ Gs - Hs, SingularD, "F H^-1 F* + G* H*^-1 G* - H*")
    B = D @ Gs @ Hsi
    C = -np.conj(D) @ Fs @ Hsi
    if scalar:
        return B[0, 0], C[0, 0], D[0, 0]
    return B, C, D


def breather_m0(q, B, C, D) -> np.ndarray:
    """Residue M0 = q* B q^T + Q q C q^T + Q q* D q^T."""
    q = np.asarray(q, dtype=complex)
    Q = reduction_q(q.shape[-2] - 2)
    qs, qt = np.conj(q), _t(q)
    return qs @ B @ qt + Q @ q @ C @ qt + Q @ qs @ D @ qt


def breather_darboux_from_residue(M0: np.ndarray, mu: complex, lam: complex) -> np.ndarray:
    lam = complex(lam)
    for pole in (mu, -mu, np.conj(mu), -np.conj(mu)):
        if abs(lam - pole) < 1e-14:
            raise PoleEvaluation(f"lambda = {lam} is a pole")
    Q = reduction_q(M0.shape[0] - 2)
    M0s = np.conj(M0)
    return (
        np.eye(M0.shape[0])
        + M0 / (lam - mu)
        - Q @ M0 @ Q / (lam + mu)
        + M0s / (lam - np.conj(mu))
        - Q @ M0s @ Q / (lam + np.conj(mu))
    )


def kernel_factor(q, mu: complex) -> np.ndarray:
    """X with M0 = X q^T, from the kernel condition at the pole.

    The regular part of M at mu must annihilate q, which reads
    q - Q X F + X* G - Q X* H = 0.  This is real-linear in X and stays well
    conditioned where H degenerates, unlike the explicit B, C, D formulas
    (whose singularity there is removable).
    """
    q = np.asarray(q, dtype=complex)
    F, G, H = breather_fgh(q, mu)
    n, s = q.shape[-2:]
    Q = reduction_q(n - 2)
    eye = np.eye(n)
    # row-major vec: vec(A X B) = (A kron B^T) vec(X)
    P = _kron(Q, _t(F))
    R = -_kron(eye, _t(G)) + _kron(Q, _t(H))
    A = np.block([[P.real + R.real, R.imag - P.imag], [P.imag + R.imag, P.real - R.real]])
    flat = q.reshape(q.shape[:-2] + (n * s,))
    b = np.concatenate([flat.real, flat.imag], axis=-1)
    sol = np.linalg.solve(A, b[..., None])[..., 0]
    return (sol[..., : n * s] + 1j * sol[..., n * s :]).reshape(q.shape)


def _kron(a, b):
    out = np.einsum("ij,...kl->...ikjl", a, b)
    return out.reshape(b.shape[:-2] + (a.shape[0] * b.shape[-2], a.shape[1] * b.shape[-1]))


def breather_residue(params: BreatherParams, times: TimeVector, method: str = "bcd") -> np.ndarray:
    """Residue M0 at lambda = mu, from the B, C, D formulas or the kernel condition."""
    q = _stable_frame(breather_q(params, times))
    if method == "kernel":
        return kernel_factor(q, params.mu) @ _t(q)
    if method != "bcd":
        raise ValueError("method must be 'bcd' or 'kernel'")
    B, C, D = breather_bcd(*breather_fgh(q, params.mu))
    return breather_m0(q, B, C, D)


def breather_darboux(params: BreatherParams, times: TimeVector, lam: complex, method: str = "bcd") -> np.ndarray:
    """M(lam) = 1 + M0/(lam-mu) - Q M0 Q/(lam+mu) + M0*/(lam-mu*) - Q M0* Q/(lam+mu*)."""
    M0 = breather_residue(params, times, method)
    if M0.ndim != 2:
        raise ValueError("breather_darboux expects scalar times")
    return breather_darboux_from_residue(M0, params.mu, lam)


def _real(values, relative: bool = False):
    imag = np.abs(np.imag(values))
    if relative:
        imag = imag / np.maximum(np.abs(values), 1.0)
    imag = np.max(imag, initial=0.0)
    if imag > REAL_TOL:
        raise NonRealOutput(f"dressed field has imaginary part {imag:.3e}")
    return np.real(values)


def breather_dress(params: BreatherParams, times: TimeVector, u=None) -> np.ndarray:
    """Rank-s dressing of the zero background.

    u~_j = u_j - 4 Re sum_{k,l} det[[q_1^k, 0, 0], [0, q_{j+2}^l, B*_kl - D*_kl],
    [0, q*_{j+2}^l, C_kl]]; output shape (N, *times.shape).
    """
    q = _stable_frame(breather_q(params, times))
    B, C, D = breather_bcd(*breather_fgh(q, params.mu))
    q1 = q[..., 0, :]  # (..., s) over k
    tail = q[..., 2:, :]  # (..., N, s) over j, l
    inner = tail[..., None, :, :] * C[..., :, None, :] - np.conj(tail)[..., None, :, :] * np.conj(B - D)[..., :, None, :]
    # inner[..., k, j, l]; determinant = q1^k * inner
    dets = np.einsum("...k,...kjl->...j", q1, inner)
    dressed = np.moveaxis(-4 * np.real(dets), -1, 0)
    return dressed if u is None else np.asarray(u) + dressed


def breather_dress_from_residue(params: BreatherParams, times: TimeVector, u=None, method: str = "bcd") -> np.ndarray:
    """u~_j = u_j + 4 Re (M0)_{1, j+2}: the lambda^0 term of M U M^-1 + M_x M^-1."""
    M0 = breather_residue(params, times, method)
    dressed = np.moveaxis(4 * np.real(M0[..., 0, 2:]), -1, 0)
    return dressed if u is None else np.asarray(u) + dressed


def breather_dress_kernel(params: BreatherParams, times: TimeVector, u=None) -> np.ndarray:
    """Same field as ``breather_dress``, computed through ``kernel_factor``."""
    q = _stable_frame(breather_q(params, times))
    X = kernel_factor(q, params.mu)
    dressed = 4 * np.real(np.einsum("...a,...ja->...j", X[..., 0, :], q[..., 2:, :]))
    dressed = np.moveaxis(dressed, -1, 0)
    return dressed if u is None else np.asarray(u) + dressed


def rank1_delta(F, G, H):
    """Delta = det[[F, H - G], [G + H, F*]]."""
    return F * np.conj(F) - (H - G) * (G + H)


def rank1_breather(params: BreatherParams, times: TimeVector) -> np.ndarray:
    """u~ = -(4/Delta) Re((C1 cos xi + C2 sin xi)(F* c + (G - H) c*)); shape (N, *shape)."""
    if params.rank != 1:
        raise ValueError("rank1_breather needs s = 1")
    q = breather_q(params, times)[..., 0]  # (..., N+2)
    F, G, H = breather_fgh(q[..., :, None], params.mu)
    F, G, H = F[..., 0, 0], G[..., 0, 0], H[..., 0, 0]
    delta = rank1_delta(F, G, H)
    c = params.C[2:, 0]
    inner = np.conj(F)[..., None] * c + (G - H)[..., None] * np.conj(c)
    values = -4 * np.real(q[..., 0:1] * inner / delta[..., None])
    _real(delta, relative=True)
    return np.moveaxis(values, -1, 0)


def rank1_delta_closed_form(r, theta, A, B):
    """Delta = -(1/r^2)(tan(theta) sin^2 A + cosh^2 B / tan(theta))^2."""
    tt = np.tan(theta)
    return -((tt * np.sin(A) ** 2 + np.cosh(B) ** 2 / tt) ** 2) / r**2


def orthonormal_breather_component(r, theta, A, B):
    """Nonzero component of the rank-one breather for C = e_1 + i e_{j+2}."""
    tt = np.tan(theta)
    num = np.sin(theta) * np.sin(A) * np.sinh(B) - np.cos(theta) * np.cos(A) * np.cosh(B)
    den = tt * np.sin(A) ** 2 + np.cosh(B) ** 2 / tt
    return 4 * r * num / den


def orthonormal_breather_gradient(r, theta, A, B):
    """(d/dA, d/dB) of ``orthonormal_breather_component``."""
    tt = np.tan(theta)
    sA, cA, shB, chB = np.sin(A), np.cos(A), np.sinh(B), np.cosh(B)
    num = np.sin(theta) * sA * shB - np.cos(theta) * cA * chB
    den = tt * sA**2 + chB**2 / tt
    num_a = np.sin(theta) * cA * shB + np.cos(theta) * sA * chB
    num_b = np.sin(theta) * sA * chB - np.cos(theta) * cA * shB
    den_a = 2 * tt * sA * cA
    den_b = 2 * chB * shB / tt
    d_a = 4 * r * (num_a * den - num * den_a) / den**2
    d_b = 4 * r * (num_b * den - num * den_b) / den**2
    return d_a, d_b


def orthonormal_breather(mu: complex, n_components: int, j: int, times: TimeVector) -> np.ndarray:
    """Full N-vector field of the orthonormal rank-one breather via the closed form."""
    mu = _check_mu(mu)
    z = np.asarray(xi(times, mu, "breather"))
    out = np.zeros((n_components,) + z.shape)
    out[j - 1] = orthonormal_breather_component(abs(mu), np.angle(mu), z.real, z.imag)
    return out
