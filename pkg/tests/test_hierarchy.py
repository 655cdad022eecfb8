import threading
from fractions import Fraction

import numpy as np
import pytest

from vmkdv.acceptance import load_golden_flows, load_golden_lax
from vmkdv.diffalg import (
    NotExact,
    ScalarPoly,
    VectorPoly,
    d_x,
    evaluate_numeric,
    evolutionary_derivative,
    format_poly,
    pairing,
    parse_poly,
    u,
)
from vmkdv.hierarchy import (
    J_COEFF,
    U_COEFF,
    FlowTable,
    LaxCoeff,
    LaxMatrix,
    check_reduction_group,
    flow,
    flow_commutator,
    lax_u,
    lax_v,
    recursion_apply,
    v3_from_closed_form,
    zero_curvature_residual,
)

T3 = "-u3 - 3/2*<u0,u0>*u1"
T5 = "u5 + 5/2*<u0,u0>*u3 + 5/2*<u1,u1>*u1 + 5*<u0,u1>*u2 + 5*<u0,u2>*u1 + 15/8*<u0,u0>^2*u1"
SAMPLES = (1, 1j, 1 + 2j)


def random_jet(n_components=3, orders=8, seed=0):
    return np.random.default_rng(seed).uniform(-1, 1, size=(orders, n_components))


# -- flows -----------------------------------------------------------------


def test_recursion_of_u1_is_vmkdv():
    assert format_poly(recursion_apply(u(1))) == T3


def test_recursion_twice_gives_t5():
    assert recursion_apply(recursion_apply(u(1))) == parse_poly(T5)


def test_t5_coefficients():
    assert sorted(flow(2).terms.values()) == [1, Fraction(15, 8), Fraction(5, 2), Fraction(5, 2), 5, 5]


def test_recursion_of_zero():
    assert recursion_apply(VectorPoly.zero()).is_zero()


def test_recursion_of_non_symmetry_raises():
    with pytest.raises(NotExact):
        recursion_apply(u(2))


def test_flow_zero_is_translation():
    assert flow(0) == u(1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_flows_are_homogeneous(n):
    assert flow(n).is_homogeneous()
    assert flow(n).weight() == 2 * n + 2


def test_goldens_match():
    golden = load_golden_flows()
    assert format_poly(flow(1)) == golden["u_t3"]
    assert flow(2) == parse_poly(golden["u_t5"])


def test_flows_commute():
    assert flow_commutator(1, 2).is_zero()


def test_non_commuting_pair_is_detected():
    wrong = parse_poly("u5 + <u0,u0>*u3")
    diff = evolutionary_derivative(flow(1), wrong) - evolutionary_derivative(wrong, flow(1))
    assert not diff.is_zero()


def test_flow_table_cache_and_cap():
    table = FlowTable(max_n=2)
    first = table.flow(2)
    assert table.flow(2) is first
    with pytest.raises(ValueError):
        table.flow(3)
    with pytest.raises(ValueError):
        table.flow(-1)


def test_flow_table_concurrent_readers_agree():
    table = FlowTable()
    results = []
    threads = [threading.Thread(target=lambda: results.append(table.flow(2))) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r is results[0] for r in results)


# -- Lax matrices ----------------------------------------------------------


def test_lax_u_blocks():
    lu = lax_u()
    assert lu[1] == LaxCoeff(a=ScalarPoly.const(1))
    assert lu[0] == LaxCoeff(v2=u(0))
    assert lu.degree() == 1


def test_lax_u_numeric_is_skew():
    m = lax_u().numeric(2, [[1.0, 0.0]])
    assert m.shape == (4, 4)
    np.testing.assert_array_equal(m, -m.T)
    assert m[0, 1] == 2 and m[1, 2] == 1


def test_lax_v0_is_lax_u():
    assert lax_v(0) == lax_u()


def test_lax_v1_matches_closed_form():
    assert lax_v(1) == v3_from_closed_form()


def test_lax_v1_matches_golden_json():
    assert lax_v(1) == load_golden_lax()


def test_lax_json_round_trip():
    v = lax_v(2)
    assert LaxMatrix.from_json(v.to_json()) == v


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lax_degree_and_leading_coefficient(n):
    v = lax_v(n)
    assert v.degree() == 2 * n + 1
    assert v[2 * n + 1] == J_COEFF


@pytest.mark.parametrize("n", [1, 2, 3])
def test_zero_curvature_is_exact(n):
    assert zero_curvature_residual(n).is_zero()


def test_corrupted_flow_breaks_zero_curvature_at_degree_zero():
    corrupted = parse_poly("-u3 - <u0,u0>*u1")
    res = zero_curvature_residual(1, flow_poly=corrupted)
    assert not res.is_zero()
    assert set(res.coeffs) == {0}
    assert res[0].v2 == corrupted - flow(1)


def test_block_bracket_matches_matrix_commutator():
    jet = random_jet(seed=3)
    x = lax_v(1)
    y = lax_v(2)
    lam = 0.7 - 0.4j
    X, Y = x.numeric(lam, jet), y.numeric(lam, jet)
    np.testing.assert_allclose(x.bracket(y).numeric(lam, jet), X @ Y - Y @ X, atol=1e-11)


def test_lax_coeff_dx_matches_numeric_chain():
    # d_x of the Lax blocks agrees with d_x applied to each entry polynomial
    c = lax_v(1)[0]
    assert c.d_x().v2 == d_x(c.v2)
    assert c.d_x().W == d_x(c.W)


# -- reduction group -------------------------------------------------------


@pytest.mark.parametrize("builder", [lax_u, lambda: lax_v(1), lambda: lax_v(2)])
def test_reduction_group_holds(builder):
    for seed in range(3):
        report = check_reduction_group(builder(), SAMPLES, random_jet(seed=seed))
        assert report.passed, report.metadata
        assert report.max_residual < 1e-12


def test_reduction_group_detects_parity_fault():
    # v1 lives only at odd degrees; planting one at an even degree breaks Q X(-lam) Q = X(lam)
    v = lax_v(1)
    broken = v + LaxMatrix({2: LaxCoeff(v1=u(1))})
    report = check_reduction_group(broken, SAMPLES, random_jet(seed=1))
    assert report.metadata["relations"]["parity"] > 0.1
    assert report.metadata["relations"]["skew"] < 1e-12
    assert not report.passed


def test_reduction_group_detects_moved_v1():
    v = lax_v(1)
    moved = dict(v.coeffs)
    moved[1] = LaxCoeff(a=v[1].a)
    moved[0] = v[0] + LaxCoeff(v1=-v[1].v1)
    report = check_reduction_group(LaxMatrix(moved), SAMPLES, random_jet(seed=2))
    assert report.metadata["relations"]["parity"] > 0.1


def test_flow_numeric_matches_hand_coded_vmkdv():
    jet = np.random.default_rng(5).uniform(-1, 1, size=(4, 3, 50))
    expected = -jet[3] - 1.5 * np.sum(jet[0] ** 2, axis=0) * jet[1]
    np.testing.assert_allclose(evaluate_numeric(flow(1), jet), expected, rtol=0, atol=1e-14)


def test_u_coeff_and_j_coeff_constants():
    assert J_COEFF.a == ScalarPoly.const(1)
    assert U_COEFF.v2 == u(0)
    assert U_COEFF.bracket(U_COEFF).is_zero()
    assert J_COEFF.bracket(U_COEFF) == LaxCoeff(v1=u(0))
    assert pairing(0, 0) * J_COEFF == LaxCoeff(a=pairing(0, 0))
