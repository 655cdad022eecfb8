"""The acceptance suite: one VerificationReport per criterion.

Composite criteria report the worst sub-check as a ratio
``residual / tolerance`` against a tolerance of 1; the individual checks
are kept in ``metadata["checks"]``.
"""

from __future__ import annotations

import json
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .diffalg import (
    BivectorPoly,
    NotExact,
    ScalarPoly,
    VectorPoly,
    basis,
    d_x,
    d_x_inverse,
    euler_operator,
    evaluate_numeric,
    format_poly,
    parse_poly,
    u,
)
from .hierarchy import FlowTable, LaxMatrix, flow_commutator, recursion_apply, zero_curvature_residual
from .numerics import Grid, OrthonormalBreatherFamily, SolitonFamily, BreatherFamily, convergence_study, flow_residual
from .solutions import (
    BreatherParams,
    SolitonParams,
    TimeVector,
    backlund_residual,
    breather_darboux,
    breather_dress,
    breather_fgh,
    breather_q,
    dressing_apply,
    one_soliton,
    one_soliton_x_derivatives,
    orthonormal_breather_params,
    rank1_breather,
    rank1_delta,
    rank1_delta_closed_form,
    soliton_darboux,
    soliton_q,
)
from .solutions.times import reduction_q
from .verify import VerificationReport, matrix_identity_check

SEED = 20240531
SOLITON_MUS = (0.5, 1.0, 2.0)
CONVERGENCE_H = (4e-2, 2e-2, 1e-2)
CONVERGENCE_ACCURACY = 4
MIN_SLOPE = 3.5
LAMBDA_SAMPLES = (0.37 + 0.21j, -1.3 + 0.55j, 0.8 - 1.7j, 2.2 + 0.1j, -0.45 - 0.9j)


# -- golden data ---------------------------------------------------------------


def golden_path(name: str, golden_dir: str | Path | None = None):
    if golden_dir is not None:
        return Path(golden_dir) / name
    return resources.files("vmkdv") / "data" / name


def load_golden_flows(golden_dir=None) -> dict:
    """``{"u_t3": text, "u_t5": text}`` from flows.txt."""
    text = golden_path("flows.txt", golden_dir).read_text()
    flows = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, _, rhs = line.partition("=")
        flows[name.strip()] = rhs.strip()
    return flows


def load_golden_lax(golden_dir=None) -> LaxMatrix:
    return LaxMatrix.from_json(json.loads(golden_path("lax_v3.json", golden_dir).read_text()))


# -- helpers ---------------------------------------------------------------------


def _combine(name: str, checks: list, **metadata) -> VerificationReport:
    """Aggregate sub-reports into one pass/fail report (worst ratio vs 1)."""
    ratios = [c.max_residual / c.tolerance if c.tolerance else (0.0 if c.max_residual == 0 else np.inf) for c in checks]
    worst = max(ratios, default=0.0)
    metadata["checks"] = [c.to_dict() for c in checks]
    return VerificationReport(name=name, max_residual=float(worst), tolerance=1.0, metadata=metadata)


def _exact(name: str, ok: bool, **metadata) -> VerificationReport:
    return VerificationReport(name=name, max_residual=0.0 if ok else 1.0, tolerance=0.0, metadata=metadata)


def _timed(name: str, seconds: float, budget: float) -> VerificationReport:
    return VerificationReport(name=f"{name} runtime (s)", max_residual=seconds, tolerance=budget)


def random_soliton_params(rng, mu: float, n_components: int) -> SolitonParams:
    v = rng.normal(size=n_components + 1)
    v /= np.linalg.norm(v)
    return SolitonParams(mu, float(v[0]), tuple(v[1:]))


def random_isotropic(rng, n_components: int, rank: int) -> np.ndarray:
    """Generic C with C^T C = 0: real and imaginary parts orthonormal, then a random gauge."""
    frame = np.linalg.qr(rng.normal(size=(n_components + 2, 2 * rank)))[0]
    gauge = rng.normal(size=(rank, rank)) + 1j * rng.normal(size=(rank, rank))
    return (frame[:, :rank] + 1j * frame[:, rank:]) @ gauge


def random_breather_pole(rng) -> complex:
    return complex(rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0.2, np.pi / 2 - 0.2)))


# -- criteria ----------------------------------------------------------------------


def criterion_1(golden_dir=None) -> VerificationReport:
    expected = load_golden_flows(golden_dir)["u_t3"]
    start = time.perf_counter()
    got = format_poly(recursion_apply(u(1)))
    elapsed = time.perf_counter() - start
    checks = [_exact("u_t3 canonical string", got == expected, expected=expected, got=got), _timed("u_t3", elapsed, 1.0)]
    return _combine("1 golden flow t3", checks)


T5_COEFFS = {
    "u5": Fraction(1),
    "<u0,u0>*u3": Fraction(5, 2),
    "<u1,u1>*u1": Fraction(5, 2),
    "<u0,u1>*u2": Fraction(5),
    "<u0,u2>*u1": Fraction(5),
    "<u0,u0>^2*u1": Fraction(15, 8),
}


def criterion_2(golden_dir=None) -> VerificationReport:
    golden = parse_poly(load_golden_flows(golden_dir)["u_t5"], VectorPoly)
    start = time.perf_counter()
    got = recursion_apply(recursion_apply(u(1)))
    elapsed = time.perf_counter() - start
    terms = {format_poly(VectorPoly._raw({k: 1})): c for k, c in got.terms.items()}
    checks = [
        _exact("u_t5 equals golden", got == golden, expected=format_poly(golden), got=format_poly(got)),
        _exact("six printed coefficients", terms == T5_COEFFS, got={k: str(v) for k, v in terms.items()}),
        _timed("u_t5", elapsed, 5.0),
    ]
    return _combine("2 golden flow t5", checks)


def criterion_3(golden_dir=None) -> VerificationReport:
    golden = load_golden_lax(golden_dir)
    start = time.perf_counter()
    got = FlowTable(max_n=1).lax_v(1)
    elapsed = time.perf_counter() - start
    degrees = sorted(set(golden.coeffs) | set(got.coeffs), reverse=True)
    checks = []
    for d in degrees:
        for block in ("a", "v1", "v2", "W"):
            g, e = getattr(got[d], block), getattr(golden[d], block)
            checks.append(_exact(f"V3 lambda^{d} {block}", g == e, expected=format_poly(e), got=format_poly(g)))
    checks.append(_timed("V3", elapsed, 5.0))
    return _combine("3 golden Lax V3", checks)


def criterion_4(quick: bool = False) -> VerificationReport:
    table = FlowTable()
    checks = []
    for n in (1, 2) if quick else (1, 2, 3):
        start = time.perf_counter()
        residual = zero_curvature_residual(n, table=table)
        elapsed = time.perf_counter() - start
        checks.append(_exact(f"zero curvature n={n}", residual.is_zero(), nonzero_degrees=sorted(residual.coeffs)))
        checks.append(_timed(f"zero curvature n={n}", elapsed, 600.0))
    return _combine("4 exact zero curvature", checks, quick=quick)


def criterion_5() -> VerificationReport:
    comm = flow_commutator(1, 2, table=FlowTable())
    return _combine("5 commutativity of t3 and t5", [_exact("D_t3 flow(2) - D_t5 flow(1)", not comm, got=format_poly(comm))])


KINDS = (ScalarPoly, VectorPoly, BivectorPoly)
MIN_WEIGHT = {ScalarPoly: 2, VectorPoly: 1, BivectorPoly: 3}


def random_homogeneous(rng, kind, weight: int, max_terms: int = 4):
    keys = [k for k in basis(kind, weight) if k != ()]
    if not keys:
        return kind.zero()
    picks = rng.choice(len(keys), size=min(max_terms, len(keys)), replace=False)
    terms = {keys[i]: Fraction(int(rng.integers(-6, 7)) or 1, int(rng.integers(1, 4))) for i in picks}
    return kind(terms)


def criterion_6(n_exact: int = 200, n_inexact: int = 20, seed: int = SEED) -> VerificationReport:
    rng = np.random.default_rng(seed)
    failures = []
    exact_done = 0
    while exact_done < n_exact:
        kind = KINDS[exact_done % 3]
        weight = int(rng.integers(MIN_WEIGHT[kind] + 1, 11))
        target = d_x(random_homogeneous(rng, kind, weight - 1))
        if not target:
            continue
        exact_done += 1
        try:
            if d_x(d_x_inverse(target)) != target:
                failures.append(f"round trip mismatch: {format_poly(target)}")
        except NotExact:
            failures.append(f"NotExact on exact input: {format_poly(target)}")
    inexact_done = 0
    while inexact_done < n_inexact:
        p = random_homogeneous(rng, ScalarPoly, int(rng.integers(2, 11)))
        if not p or not euler_operator(p):
            continue  # the oracle says exact: not a valid negative sample
        inexact_done += 1
        try:
            d_x_inverse(p)
            failures.append(f"no NotExact for {format_poly(p)}")
        except NotExact:
            pass
    return VerificationReport(
        name="6 D_x^-1 round trip",
        max_residual=float(len(failures)),
        tolerance=0.0,
        metadata={"exact_inputs": n_exact, "inexact_inputs": n_inexact, "failures": failures[:10]},
    )


def soliton_convergence(params: SolitonParams, n: int, times: TimeVector, accuracy: int = CONVERGENCE_ACCURACY, precision: str = "extended"):
    family = SolitonFamily(params)

    def residual(h):
        grid = Grid.with_spacing(-15.0, 15.0, h)
        return flow_residual(family, n, grid, times, accuracy=accuracy, precision=precision).max_residual

    return convergence_study(residual, CONVERGENCE_H)


def criterion_7(seed: int = SEED, components=(1, 2, 3)) -> VerificationReport:
    rng = np.random.default_rng(seed)
    checks = []
    for mu in SOLITON_MUS:
        for n_comp in components:
            params = random_soliton_params(rng, mu, n_comp)
            family = SolitonFamily(params)
            tag = f"mu={mu} N={n_comp}"
            t3 = TimeVector.of(t3=0.3)
            t5 = TimeVector.of(t3=0.3, t5=0.2)
            checks.append(_rename(flow_residual(family, 1, times=t3), f"n=1 residual {tag}"))
            checks.append(_rename(flow_residual(family, 2, times=t5), f"n=2 residual {tag}"))
            table = soliton_convergence(params, 1, t3)
            checks.append(
                VerificationReport(
                    name=f"n=1 convergence slope {tag} (reported as {MIN_SLOPE}/slope)",
                    max_residual=MIN_SLOPE / table.slope if table.slope > 0 else np.inf,
                    tolerance=1.0,
                    metadata={"h": table.h, "residual": table.residual, "slope": table.slope},
                )
            )
    return _combine("7 soliton flow residuals", checks)


def _rename(report: VerificationReport, name: str) -> VerificationReport:
    report.name = name
    return report


def criterion_8(seed: int = SEED, points: int = 1000) -> VerificationReport:
    rng = np.random.default_rng(seed)
    checks = []
    for n_comp in (1, 2, 3):
        params = random_soliton_params(rng, float(rng.uniform(0.5, 2.0)), n_comp)
        times = TimeVector.of(rng.uniform(-6, 6, points), t3=rng.uniform(-1, 1, points))
        diff = np.max(np.abs(dressing_apply(soliton_q(params, times), params.mu) - one_soliton(params, times)))
        checks.append(VerificationReport(f"dressing vs closed form N={n_comp}", float(diff), 1e-12))
    return _combine("8 dressing path identity", checks)


def criterion_9(seed: int = SEED, sets: int = 20) -> VerificationReport:
    rng = np.random.default_rng(seed)
    relations = ("orthogonal", "reality", "parity")
    checks = []
    for i in range(sets):
        n_comp = int(rng.integers(1, 5))
        params = random_soliton_params(rng, float(rng.uniform(0.5, 2.0)), n_comp)
        t = TimeVector.of(float(rng.uniform(-3, 3)), t3=float(rng.uniform(-1, 1)))
        checks.append(
            matrix_identity_check(
                lambda lam: soliton_darboux(params, t, lam), relations, LAMBDA_SAMPLES, reduction_q(n_comp),
                tolerance=1e-10, name=f"soliton Darboux set {i}",
            )
        )
    for i in range(sets):
        n_comp = int(rng.integers(1, 5))
        rank = int(rng.integers(1, (n_comp + 1) // 2 + 1))
        bparams = BreatherParams(random_breather_pole(rng), random_isotropic(rng, n_comp, rank))
        t = TimeVector.of(float(rng.uniform(-3, 3)), t3=float(rng.uniform(-1, 1)))
        checks.append(
            matrix_identity_check(
                lambda lam: breather_darboux(bparams, t, lam), relations, LAMBDA_SAMPLES, reduction_q(n_comp),
                tolerance=1e-10, name=f"breather Darboux set {i} (N={n_comp}, s={rank})",
            )
        )
    return _combine("9 Darboux identities", checks)


def times_for_phase(mu: complex, A, B) -> TimeVector:
    """(x, t3) with mu x + mu^3 t3 = A + i B."""
    m = np.array([[mu.real, (mu**3).real], [mu.imag, (mu**3).imag]])
    x, t3 = np.linalg.solve(m, np.array([np.ravel(A), np.ravel(B)]))
    return TimeVector.of(x, t3=t3)


def criterion_10(seed: int = SEED) -> VerificationReport:
    rng = np.random.default_rng(seed)
    checks = []
    x = np.linspace(-5, 5, 100)
    for i in range(5):
        n_comp = int(rng.integers(1, 5))
        params = BreatherParams(random_breather_pole(rng), random_isotropic(rng, n_comp, 1))
        t = TimeVector.of(x, t3=float(rng.uniform(-1, 1)))
        diff = np.max(np.abs(breather_dress(params, t) - rank1_breather(params, t)))
        checks.append(VerificationReport(f"s=1 dress vs rank-1 form, set {i} (N={n_comp})", float(diff), 1e-10))
    r, theta = rng.uniform(0.5, 1.5, 200), rng.uniform(0.15, np.pi / 2 - 0.15, 200)
    A, B = rng.uniform(-4, 4, 200), rng.uniform(-3, 3, 200)
    worst = 0.0
    for k in range(200):
        mu = complex(r[k] * np.exp(1j * theta[k]))
        params = orthonormal_breather_params(mu, 1, 1)
        q = breather_q(params, times_for_phase(mu, A[k], B[k]))[0]
        F, G, H = (m[0, 0] for m in breather_fgh(q, mu))
        det = rank1_delta(F, G, H)
        closed = rank1_delta_closed_form(r[k], theta[k], A[k], B[k])
        worst = max(worst, abs(det - closed) / max(1.0, abs(closed)))
    checks.append(VerificationReport("Delta determinant vs closed form (relative)", float(worst), 1e-12))
    mu = complex(0.8 * np.exp(0.6j))
    t3 = TimeVector.of(t3=0.3)
    checks.append(_rename(flow_residual(OrthonormalBreatherFamily(mu, 1, 1), 1, times=t3), "N=1 orthonormal breather n=1 (analytic_xi)"))
    checks.append(
        _rename(
            flow_residual(BreatherFamily(orthonormal_breather_params(mu, 1, 1), "rank1"), 1, times=t3, method="fd", precision="double"),
            "N=1 rank-1 breather n=1 (fd in t3)",
        )
    )
    return _combine("10 breather consistency", checks)


def criterion_11(seed: int = SEED, sets: int = 10) -> VerificationReport:
    rng = np.random.default_rng(seed)
    x = np.linspace(-10, 10, 2001)
    exact, perturbed = [], []
    for _ in range(sets):
        n_comp = int(rng.integers(1, 4))
        params = random_soliton_params(rng, float(rng.uniform(0.5, 2.0)), n_comp)
        t = TimeVector.of(x, t3=float(rng.uniform(-1, 1)))
        jet = one_soliton_x_derivatives(params, t, 1)
        zero = np.zeros_like(jet[0])
        exact.append(backlund_residual(zero, zero, jet[0], jet[1], params.mu, branch="best").worst())
        perturbed.append(backlund_residual(zero, zero, 1.01 * jet[0], 1.01 * jet[1], params.mu, branch="best", strict=False).worst())
    checks = [
        VerificationReport("exact pairs", max(exact), 1e-10, {"per_set": exact}),
        VerificationReport("perturbed pairs (reported as 1e-3/min worst)", 1e-3 / min(perturbed), 1.0, {"per_set": perturbed}),
    ]
    return _combine("11 Backlund", checks)


def _random_rotation(rng, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def criterion_12(seed: int = SEED) -> VerificationReport:
    from .hierarchy import default_table

    rng = np.random.default_rng(seed)
    x = np.linspace(-8, 8, 801)
    checks = []
    table = default_table()
    for n_comp in (1, 2, 3):
        params = random_soliton_params(rng, float(rng.uniform(0.5, 2.0)), n_comp)
        t = TimeVector.of(x, t3=0.4, t5=-0.1)
        base = one_soliton(params, t)
        rot = _random_rotation(rng, n_comp)
        rotated = SolitonParams(params.mu, params.c0, tuple(rot @ params.vector))
        checks.append(VerificationReport(f"O_N soliton N={n_comp}", float(np.max(np.abs(one_soliton(rotated, t) - rot @ base))), 1e-12))
        eps = float(rng.uniform(-0.5, 0.5))
        scaled = SolitonParams(np.exp(-eps) * params.mu, params.c0, params.c)
        ts = TimeVector.of(np.exp(eps) * x, t3=np.exp(3 * eps) * 0.4, t5=np.exp(5 * eps) * -0.1)
        checks.append(VerificationReport(f"scaling soliton N={n_comp}", float(np.max(np.abs(one_soliton(scaled, ts) - np.exp(-eps) * base))), 1e-12))
        a = float(rng.uniform(-2, 2))
        delta = np.arctanh(params.c0) + params.mu * a
        direction = params.vector / np.linalg.norm(params.vector)
        shifted = SolitonParams(params.mu, float(np.tanh(delta)), tuple(direction / np.cosh(delta)))
        translated = one_soliton(params, TimeVector.of(x + a, t3=0.4, t5=-0.1))
        checks.append(VerificationReport(f"translation soliton N={n_comp}", float(np.max(np.abs(one_soliton(shifted, t) - translated))), 1e-12))
        # the same symmetries on the flow itself, through the symbolic evaluator
        jet = rng.normal(size=(6, n_comp, 50))
        for n in (1, 2):
            f = table.flow(n)
            lhs = evaluate_numeric(f, np.einsum("ij,kjp->kip", rot, jet))
            checks.append(VerificationReport(f"O_N flow({n}) N={n_comp}", float(np.max(np.abs(lhs - rot @ evaluate_numeric(f, jet)))), 1e-12))
            weights = np.exp(-eps * np.arange(1, 7))[:, None, None]
            lhs = evaluate_numeric(f, weights * jet)
            rhs = np.exp(-(2 * n + 2) * eps) * evaluate_numeric(f, jet)
            checks.append(VerificationReport(f"scaling flow({n}) N={n_comp}", float(np.max(np.abs(lhs - rhs))), 1e-12))
    return _combine("12 symmetry suite", checks)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
}


def run_all(quick: bool = False, golden_dir=None, only=None) -> list:
    """Run the suite; exceptions inside a criterion become a failing report."""
    reports = []
    for number, fn in CRITERIA.items():
        if only and number not in only:
            continue
        kwargs = {}
        if number in (1, 2, 3):
            kwargs["golden_dir"] = golden_dir
        if number == 4:
            kwargs["quick"] = quick
        try:
            reports.append(fn(**kwargs))
        except Exception as exc:  # isolate and name the failing criterion
            reports.append(
                VerificationReport(
                    name=f"{number} {fn.__name__}",
                    max_residual=float("inf"),
                    tolerance=0.0,
                    metadata={"error": f"{type(exc).__name__}: {exc}"},
                )
            )
    return reports


def summary_table(reports) -> str:
    lines = [f"{'criterion':<34} {'result':<6} {'worst':>11} {'tol':>8}"]
    for r in reports:
        lines.append(f"{r.name:<34} {'PASS' if r.passed else 'FAIL':<6} {r.max_residual:11.3e} {r.tolerance:8.1e}")
    n_pass = sum(r.passed for r in reports)
    lines.append(f"{n_pass}/{len(reports)} criteria passed")
    return "\n".join(lines)
