import numpy as np
import pytest

from vmkdv.acceptance import random_breather_pole, random_isotropic, random_soliton_params
from vmkdv.numerics import BreatherFamily, Grid, flow_residual
from vmkdv.solutions import (
    AxisPole,
    BreatherParams,
    ConstraintViolation,
    DegenerateDenominator,
    MaximalIsotropicRank,
    NonRealOutput,
    PoleEvaluation,
    SingularH,
    SolitonParams,
    TimeVector,
    backlund_branch,
    backlund_residual,
    breather_bcd,
    breather_darboux,
    breather_dress,
    breather_dress_from_residue,
    breather_dress_kernel,
    breather_fgh,
    breather_q,
    breather_residue,
    compatible_breather_params,
    dressing_apply,
    fundamental_solution,
    one_soliton,
    one_soliton_x_derivatives,
    orthonormal_breather,
    orthonormal_breather_component,
    orthonormal_breather_params,
    projector,
    rank1_breather,
    rank1_delta,
    rank1_delta_closed_form,
    reduction_q,
    soliton_darboux,
    soliton_darboux_from_projector,
    soliton_q,
    xi,
)
from vmkdv.verify import matrix_identity_check

LAMBDAS = (1, 2 + 1j, -1.5j, 0.3 - 0.8j, -2.1 + 0.4j)
RELATIONS = ("orthogonal", "reality", "parity")


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


# -- times and fundamental solution ----------------------------------------


def test_xi_variants():
    t = TimeVector.of(0.7, t3=0.2)
    mu = 1.3
    assert xi(TimeVector.of(0.7), mu) == pytest.approx(mu * 0.7)
    assert xi(t, mu, "soliton") == pytest.approx(mu * 0.7 - mu**3 * 0.2)
    assert xi(t, mu, "breather") == pytest.approx(mu * 0.7 + mu**3 * 0.2)


def test_time_names():
    t = TimeVector.from_names({"x": 1.0, "t5": 2.0})
    assert t.x == 1.0 and t.get(2) == 2.0 and t.get(1) == 0.0
    with pytest.raises(ValueError):
        TimeVector.of(0.0, t4=1.0)


def test_fundamental_solution_identity_at_zero():
    np.testing.assert_allclose(fundamental_solution(TimeVector.of(0.0), 1j, 3), np.eye(5), atol=0)


def test_fundamental_solution_soliton_block():
    mu, x = 0.8, 0.6
    psi = fundamental_solution(TimeVector.of(x), 1j * mu, 2)
    k = mu * x
    np.testing.assert_allclose(psi[:2, :2], [[np.cosh(k), 1j * np.sinh(k)], [-1j * np.sinh(k), np.cosh(k)]], atol=1e-15)


def test_fundamental_solution_breather_block():
    mu, x = 0.8, 0.6
    psi = fundamental_solution(TimeVector.of(x), mu, 2)
    k = mu * x
    np.testing.assert_allclose(psi[:2, :2], [[np.cos(k), np.sin(k)], [-np.sin(k), np.cos(k)]], atol=1e-15)


def test_fundamental_solution_is_complex_orthogonal():
    psi = fundamental_solution(TimeVector.of(0.4, t3=-0.3), 0.9 + 0.5j, 3)
    np.testing.assert_allclose(psi @ psi.T, np.eye(5), atol=1e-13)


# -- soliton ---------------------------------------------------------------


def test_soliton_q_at_origin():
    q = soliton_q(SolitonParams(1.0, 0.0, (1.0, 0.0)), TimeVector.of(0.0))
    np.testing.assert_array_equal(q, [1j, 0, 1, 0])


def test_soliton_q_isotropic_and_from_psi(rng):
    for n in (1, 2, 4):
        p = random_soliton_params(rng, 1.1, n)
        x = rng.uniform(-5, 5, size=20)
        q = soliton_q(p, TimeVector.of(x, t3=0.3))
        assert np.max(np.abs(np.einsum("i...,i...->...", q, q))) < 1e-13 * np.max(np.abs(q)) ** 2
        t = TimeVector.of(x[3], t3=0.3)
        np.testing.assert_allclose(fundamental_solution(t, 1j * p.mu, n) @ p.constant, q[:, 3], atol=1e-12)


def test_soliton_params_validation():
    with pytest.raises(ValueError):
        SolitonParams(1.0, 0.5, (0.5,))
    with pytest.raises(ValueError):
        SolitonParams(-1.0, 0.0, (1.0,))
    p = SolitonParams.normalized(1.0, 3.0, (4.0,))
    assert p.c0 == pytest.approx(0.6) and p.c[0] == pytest.approx(0.8)


def test_projector_example():
    q = np.array([1j, 0, 1, 0])
    P = projector(q)
    Q = reduction_q(2)
    assert q @ Q @ q == pytest.approx(2)
    np.testing.assert_allclose(P, Q @ np.outer(q, q) / 2)


def test_projector_identities(rng):
    p = random_soliton_params(rng, 0.7, 3)
    q = soliton_q(p, TimeVector.of(0.4))
    P = projector(q)
    Q = reduction_q(3)
    np.testing.assert_allclose(P @ P, P, atol=1e-14)
    assert np.trace(P) == pytest.approx(1, abs=1e-14)
    assert np.linalg.matrix_rank(P) == 1
    np.testing.assert_allclose(np.conj(P), Q @ P @ Q, atol=1e-14)


def test_projector_lightlike():
    with pytest.raises(DegenerateDenominator):
        projector([1, 1, 0, 0])


@pytest.mark.parametrize("relation", RELATIONS)
def test_soliton_darboux_relations(rng, relation):
    p = random_soliton_params(rng, 1.2, 2)
    t = TimeVector.of(0.3, t3=-0.1)
    report = matrix_identity_check(lambda lam: soliton_darboux(p, t, lam), (relation,), LAMBDAS, reduction_q(2), tolerance=1e-12)
    assert report.passed, report.metadata


def test_soliton_darboux_pole():
    p = SolitonParams(1.0, 0.0, (1.0,))
    with pytest.raises(PoleEvaluation):
        soliton_darboux(p, TimeVector.of(0.0), 1j)


def test_non_projector_fails_orthogonality():
    P = 0.9 * projector(soliton_q(SolitonParams(1.0, 0.0, (1.0,)), TimeVector.of(0.2)))
    report = matrix_identity_check(
        lambda lam: soliton_darboux_from_projector(P, 1.0, lam), ("orthogonal",), LAMBDAS, reduction_q(1), tolerance=1e-10
    )
    assert not report.passed


def test_one_soliton_at_peak():
    u = one_soliton(SolitonParams(1.0, 0.0, (1.0, 0.0, 0.0)), TimeVector.of(0.0))
    np.testing.assert_allclose(u, [2, 0, 0], atol=1e-15)


def test_one_soliton_matches_product_form(rng):
    p = random_soliton_params(rng, 1.5, 3)
    x = np.linspace(-4, 4, 41)
    t = TimeVector.of(x, t3=0.25)
    z = xi(t, p.mu)
    expected = 2 * p.mu * np.multiply.outer(p.vector, 1 / (np.cosh(z) + p.c0 * np.sinh(z)))
    np.testing.assert_allclose(one_soliton(p, t), expected, rtol=1e-12)


def test_denominator_identity(rng):
    c0 = rng.uniform(-1, 1, 50)
    z = rng.uniform(-3, 3, 50)
    ch, sh = np.cosh(z), np.sinh(z)
    lhs = (ch + c0 * sh) ** 2 + (c0 * ch + sh) ** 2 + 1 - c0**2
    np.testing.assert_allclose(lhs, 2 * (ch + c0 * sh) ** 2, rtol=1e-13)


def test_dressing_matches_one_soliton(rng):
    for n in (1, 2, 3):
        p = random_soliton_params(rng, 0.9, n)
        t = TimeVector.of(rng.uniform(-8, 8, 200), t3=rng.uniform(-1, 1), t5=rng.uniform(-1, 1))
        np.testing.assert_allclose(dressing_apply(soliton_q(p, t), p.mu), one_soliton(p, t), rtol=0, atol=1e-12)


def test_dressing_examples():
    np.testing.assert_allclose(dressing_apply([1j, 0, 1, 0], 1.0), [2, 0])
    u0 = np.array([0.3, -0.2])
    np.testing.assert_array_equal(dressing_apply([0, 1, 0.5, 0.5], 1.0, u0), u0)


def test_dressing_rejects_non_real_structure():
    with pytest.raises(NonRealOutput):
        dressing_apply([1j, 0, 1j + 1, 0], 1.0)


def test_soliton_is_o_n_equivariant(rng):
    p = random_soliton_params(rng, 1.0, 3)
    A = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    rotated = SolitonParams(p.mu, p.c0, tuple(A @ p.vector))
    t = TimeVector.of(np.linspace(-3, 3, 31), t3=0.4)
    np.testing.assert_allclose(one_soliton(rotated, t), A @ one_soliton(p, t), atol=1e-12)


def test_soliton_scaling_symmetry(rng):
    p = random_soliton_params(rng, 1.3, 2)
    eps = 0.37
    x = np.linspace(-3, 3, 31)
    scaled = SolitonParams(p.mu * np.exp(-eps), p.c0, p.c)
    lhs = one_soliton(scaled, TimeVector.of(np.exp(eps) * x, t3=np.exp(3 * eps) * 0.2))
    np.testing.assert_allclose(lhs, np.exp(-eps) * one_soliton(p, TimeVector.of(x, t3=0.2)), atol=1e-12)


def test_soliton_depends_on_times_through_xi(rng):
    p = random_soliton_params(rng, 0.8, 2)
    x = np.linspace(-3, 3, 31)
    dt = 0.3
    # shifting t3 by dt equals shifting x by mu^2 dt
    a = one_soliton(p, TimeVector.of(x, t3=dt))
    b = one_soliton(p, TimeVector.of(x - p.mu**2 * dt))
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_soliton_analytic_jet_matches_finite_difference():
    p = SolitonParams.normalized(1.0, 0.3, (1.0, 0.5))
    h = 1e-3
    jet = one_soliton_x_derivatives(p, TimeVector.of(0.4), 1)
    fd = (one_soliton(p, TimeVector.of(0.4 + h)) - one_soliton(p, TimeVector.of(0.4 - h))) / (2 * h)
    np.testing.assert_allclose(jet[1], fd, atol=1e-6)


# -- Backlund --------------------------------------------------------------


def _soliton_pair(p, x, scale=1.0):
    t = TimeVector.of(x, t3=0.1)
    jet = one_soliton_x_derivatives(p, t, 1)
    zero = np.zeros_like(jet[0])
    return zero, zero, scale * jet[0], scale * jet[1], t


def test_backlund_vacuum_to_soliton(rng):
    for _ in range(5):
        p = random_soliton_params(rng, rng.uniform(0.5, 2), 3)
        u, ux, v, vx, t = _soliton_pair(p, np.linspace(-10, 10, 401))
        res = backlund_residual(u, ux, v, vx, p.mu, branch=backlund_branch(p, t))
        assert res.worst() < 1e-10
        best = backlund_residual(u, ux, v, vx, p.mu, branch="best")
        assert best.worst() < 1e-10


def test_backlund_identical_fields():
    # only the vacuum pairs with itself: u~ = u != 0 leaves mu a0 (u~ + u) behind
    zero = np.zeros((2, 5))
    res = backlund_residual(zero, zero, zero, zero, 1.0)
    assert res.residual == 0 and res.constraint_deviation == 0
    np.testing.assert_array_equal(np.abs(res.a0), 1)
    v = np.full((2, 5), 0.3)
    assert backlund_residual(v, zero, v, zero, 1.0).residual > 0.1


def test_backlund_perturbed_pair():
    p = SolitonParams.normalized(1.0, 0.2, (1.0, 0.3))
    u, ux, v, vx, t = _soliton_pair(p, np.linspace(-10, 10, 401), scale=1.01)
    with pytest.raises(ConstraintViolation):
        backlund_residual(u, ux, v, vx, p.mu, branch=backlund_branch(p, t))
    res = backlund_residual(u, ux, v, vx, p.mu, branch="best", strict=False)
    assert res.worst() >= 1e-3


def test_backlund_shrunk_pair_fails_without_violation():
    p = SolitonParams.normalized(1.0, 0.2, (1.0, 0.3))
    u, ux, v, vx, t = _soliton_pair(p, np.linspace(-10, 10, 401), scale=0.99)
    res = backlund_residual(u, ux, v, vx, p.mu, branch="best")
    assert res.worst() >= 1e-3


# -- breather ---------------------------------------------------------------


def test_breather_param_validation():
    with pytest.raises(AxisPole):
        BreatherParams(1.0, [1, 0, 1j])
    with pytest.raises(AxisPole):
        BreatherParams(1j, [1, 0, 1j])
    with pytest.raises(ValueError):
        BreatherParams(1 + 1j, [1, 0, 1])
    with pytest.raises(MaximalIsotropicRank):
        BreatherParams(1 + 1j, [[1, 0], [1j, 0], [0, 1], [0, 1j]])


def test_fgh_example():
    q = np.array([1, 0, 1j, 0], dtype=complex)[:, None]
    mu = 1 + 1j
    F, G, H = breather_fgh(q, mu)
    assert F[0, 0] == pytest.approx(-1 / mu)
    assert G[0, 0] == pytest.approx(-1j)
    assert H[0, 0] == pytest.approx(0)
    with pytest.raises(SingularH):
        breather_bcd(F, G, H)


def test_fgh_symmetry_and_gauge(rng):
    C = random_isotropic(rng, 4, 2)
    q = breather_q(BreatherParams(0.8 + 0.5j, C), TimeVector.of(0.3))
    F, G, H = breather_fgh(q, 0.8 + 0.5j)
    np.testing.assert_allclose(F, F.T, atol=1e-14)
    np.testing.assert_allclose(H, np.conj(H).T, atol=1e-14)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    F2, G2, H2 = breather_fgh(q @ g, 0.8 + 0.5j)
    np.testing.assert_allclose(F2, g.T @ F @ g, atol=1e-12)
    np.testing.assert_allclose(G2, np.conj(g).T @ G @ g, atol=1e-12)
    np.testing.assert_allclose(H2, np.conj(g).T @ H @ g, atol=1e-12)


def test_bcd_scalar_form():
    F, G, H = 0.3 + 0.2j, 0.5 - 0.1j, 0.7 + 0j
    B, C, D = breather_bcd(F, G, H)
    expected_d = -1 / (F / H * np.conj(F) + np.conj(G) / np.conj(H) * np.conj(G) - np.conj(H))
    assert D == pytest.approx(expected_d)
    assert B == pytest.approx(D * np.conj(G) / np.conj(H))
    assert C == pytest.approx(-np.conj(D) * np.conj(F) / np.conj(H))


def test_breather_q_isotropic(rng):
    p = BreatherParams(random_breather_pole(rng), random_isotropic(rng, 3, 2))
    q = breather_q(p, TimeVector.of(np.linspace(-4, 4, 9), t3=0.2))
    qtq = np.swapaxes(q, -1, -2) @ q
    assert np.max(np.abs(qtq)) < 1e-13 * np.max(np.abs(q)) ** 2


@pytest.mark.parametrize("rank", [1, 2])
def test_breather_darboux_relations(rng, rank):
    for _ in range(5):
        p = BreatherParams(random_breather_pole(rng), random_isotropic(rng, 3, rank))
        t = TimeVector.of(rng.uniform(-2, 2), t3=rng.uniform(-0.5, 0.5))
        for method in ("bcd", "kernel"):
            report = matrix_identity_check(lambda lam: breather_darboux(p, t, lam, method), RELATIONS, LAMBDAS, reduction_q(3))
            assert report.passed, (method, report.metadata)


def test_breather_darboux_pole():
    p = orthonormal_breather_params(0.6 + 0.8j, 2, 1)
    with pytest.raises(PoleEvaluation):
        breather_darboux(p, TimeVector.of(0.5), -0.6 + 0.8j)


def test_rank1_dress_agrees_with_closed_form(rng):
    x = np.linspace(-6, 6, 100)
    for _ in range(5):
        p = BreatherParams(random_breather_pole(rng), random_isotropic(rng, 3, 1))
        t = TimeVector.of(x, t3=0.15)
        ref = rank1_breather(p, t)
        np.testing.assert_allclose(breather_dress(p, t), ref, rtol=0, atol=1e-10)
        np.testing.assert_allclose(breather_dress_kernel(p, t), ref, rtol=0, atol=1e-10)
        np.testing.assert_allclose(breather_dress_from_residue(p, t), ref, rtol=0, atol=1e-10)


def test_orthonormal_breather_has_one_component():
    mu = 0.9 * np.exp(0.6j)
    p = orthonormal_breather_params(mu, 3, 2)
    t = TimeVector.of(np.linspace(-5, 5, 51))
    # H vanishes at xi = 0 for this C: the literal B, C, D path cannot be used there
    with pytest.raises(SingularH):
        breather_dress(p, t)
    u = breather_dress_kernel(p, t)
    assert np.max(np.abs(u[[0, 2]])) < 1e-14
    assert np.max(np.abs(u[1])) > 0.1
    np.testing.assert_allclose(u, orthonormal_breather(mu, 3, 2, t), atol=1e-12)


def test_orthonormal_breather_value_at_origin():
    r, theta = 1.3, 0.7
    u = breather_dress_kernel(orthonormal_breather_params(r * np.exp(1j * theta), 2, 1), TimeVector.of(0.0))
    assert u[0] == pytest.approx(-4 * r * np.sin(theta), abs=1e-12)
    assert orthonormal_breather(np.exp(1j * np.pi / 4), 1, 1, TimeVector.of(0.0))[0] == pytest.approx(-2 * np.sqrt(2))


def test_delta_closed_form(rng):
    for _ in range(50):
        r, theta = rng.uniform(0.3, 2), rng.uniform(0.1, np.pi / 2 - 0.1)
        A, B = rng.uniform(-3, 3), rng.uniform(-2, 2)
        mu = r * np.exp(1j * theta)
        # phase xi = mu x + mu^3 t3 hits A + iB
        m = np.array([[mu.real, (mu**3).real], [mu.imag, (mu**3).imag]])
        x, t3 = np.linalg.solve(m, [A, B])
        q = breather_q(orthonormal_breather_params(mu, 2, 1), TimeVector.of(x, t3=t3))
        F, G, H = breather_fgh(q, mu)
        delta = rank1_delta(F[0, 0], G[0, 0], H[0, 0])
        closed = rank1_delta_closed_form(r, theta, A, B)
        assert abs(delta - closed) <= 1e-12 * max(1.0, abs(closed))


def test_gauge_invariance(rng):
    x = np.linspace(-5, 5, 60)
    t = TimeVector.of(x, t3=0.1)
    p = compatible_breather_params(0.7 + 0.9j, 3, 2, rng)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    np.testing.assert_allclose(breather_dress(p.gauged(g), t), breather_dress(p, t), atol=1e-10)
    np.testing.assert_allclose(breather_dress_kernel(p.gauged(g), t), breather_dress_kernel(p, t), atol=1e-10)


def test_kernel_and_bcd_residues_agree(rng):
    p = compatible_breather_params(0.8 + 0.6j, 4, 2, rng)
    t = TimeVector.of(np.linspace(-3, 3, 25), t3=0.2)
    np.testing.assert_allclose(breather_residue(p, t, "kernel"), breather_residue(p, t, "bcd"), atol=1e-9)
    np.testing.assert_allclose(breather_dress_kernel(p, t), breather_dress(p, t), atol=1e-9)


def test_compatible_params_constraints(rng):
    p = compatible_breather_params(0.8 + 0.6j, 5, 3, rng)
    assert p.rank == 3
    assert p.symplectic_defect < 1e-12
    assert np.max(np.abs(p.C.T @ p.C)) < 1e-10
    with pytest.raises(ValueError):
        compatible_breather_params(0.8 + 0.6j, 2, 2, rng)


def test_rank_two_breather_solves_vmkdv_only_when_compatible(rng):
    # C^T J C = 0 is needed beyond isotropy for the dressing to be a Darboux map
    grid = Grid(-12, 12, 1201)
    times = TimeVector.of(0.0, t3=0.2)
    good = compatible_breather_params(0.9 + 0.7j, 3, 2, rng)
    res = flow_residual(BreatherFamily(good), 1, grid, times, method="fd", precision="double", tolerance=1e-4)
    assert res.passed, res.max_residual
    bad = BreatherParams(0.9 + 0.7j, random_isotropic(rng, 3, 2))
    assert bad.symplectic_defect > 1e-2
    res = flow_residual(BreatherFamily(bad), 1, grid, times, method="fd", precision="double", tolerance=1e-4)
    assert res.max_residual > 1e-2


def test_rank1_breather_requires_rank_one(rng):
    p = compatible_breather_params(0.8 + 0.6j, 3, 2, rng)
    with pytest.raises(ValueError):
        rank1_breather(p, TimeVector.of(0.0))


def test_breather_translation_dependence_through_phase():
    mu = 0.9 * np.exp(0.5j)
    p = orthonormal_breather_params(mu, 1, 1)
    x = np.linspace(-3, 3, 31)
    # t3 enters only via xi = mu x + mu^3 t3: compare against the closed form in (A, B)
    z = xi(TimeVector.of(x, t3=0.4), mu, "breather")
    np.testing.assert_allclose(
        rank1_breather(p, TimeVector.of(x, t3=0.4))[0],
        orthonormal_breather_component(abs(mu), np.angle(mu), z.real, z.imag),
        atol=1e-12,
    )
