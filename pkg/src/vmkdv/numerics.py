"""Grid sampling, centered finite differences and PDE residuals for hierarchy flows."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .diffalg import evaluate_numeric
from .hierarchy import FlowTable, default_table
from .solutions import (
    BreatherParams,
    SolitonParams,
    TimeVector,
    breather_dress,
    breather_dress_kernel,
    one_soliton,
    one_soliton_time_derivative,
    one_soliton_x_derivatives,
    orthonormal_breather,
    orthonormal_breather_gradient,
    rank1_breather,
    xi,
)
from .verify import VerificationReport, matrix_identity_check

__all__ = [
    "Grid",
    "GridTooSmall",
    "SolutionField",
    "SolitonFamily",
    "BreatherFamily",
    "OrthonormalBreatherFamily",
    "ConvergenceTable",
    "stencil_weights",
    "fd_derivative",
    "fd_jet",
    "flow_residual",
    "convergence_study",
    "matrix_identity_check",
    "stencil_radius",
    "DEFAULT_ACCURACY",
]

DEFAULT_ACCURACY = 8
PRECISIONS = {"double": np.float64, "extended": np.longdouble}


def stencil_radius(order: int, accuracy: int = DEFAULT_ACCURACY) -> int:
    """Half-width of the centered stencil of the given (even) accuracy order."""
    if accuracy < 2 or accuracy % 2:
        raise ValueError("accuracy order must be even and >= 2")
    if order == 0:
        return 0
    return (order - 1) // 2 + accuracy // 2


class GridTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    x0: float = -15.0
    x1: float = 15.0
    nx: int = 3001

    def __post_init__(self):
        if not self.x1 > self.x0:
            raise ValueError("grid needs x1 > x0")
        if self.nx < 2:
            raise GridTooSmall("grid needs at least two points")

    @property
    def h(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    def points(self, precision: str = "double") -> np.ndarray:
        dtype = PRECISIONS[precision]
        return dtype(self.x0) + np.arange(self.nx, dtype=dtype) * ((dtype(self.x1) - dtype(self.x0)) / (self.nx - 1))

    @classmethod
    def with_spacing(cls, x0: float, x1: float, h: float) -> "Grid":
        return cls(x0, x1, int(round((x1 - x0) / h)) + 1)


@dataclass
class SolutionField:
    """Samples u(x) of shape (N, nx) at one time slice."""

    x: np.ndarray
    values: np.ndarray
    times: TimeVector | None = None
    provenance: str = ""

    @property
    def samples(self) -> np.ndarray:
        """nx x N view."""
        return self.values.T

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def edge_magnitude(self) -> float:
        return float(max(np.linalg.norm(self.values[:, 0]), np.linalg.norm(self.values[:, -1])))


@lru_cache(maxsize=None)
def stencil_weights(order: int, radius: int) -> tuple:
    """Exact centered weights w_k (k = -radius..radius) with sum w_k f(kh) ~ h^order f^(order)(0)."""
    if order > 2 * radius:
        raise GridTooSmall(f"radius {radius} cannot resolve derivative order {order}")
    offsets = range(-radius, radius + 1)
    size = 2 * radius + 1
    # moment conditions sum_k w_k k^p = order! delta_{p,order}
    rows = [[Fraction(k) ** p for k in offsets] + [Fraction(factorial(order) if p == order else 0)] for p in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [v * inv for v in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return tuple(rows[r][-1] for r in range(size))


def _apply_stencil(values: np.ndarray, order: int, radius: int, h: float, trim: int) -> np.ndarray:
    weights = stencil_weights(order, radius)
    n = values.shape[-1]
    out = np.zeros(values.shape[:-1] + (n - 2 * trim,), dtype=values.dtype)
    for k, w in zip(range(-radius, radius + 1), weights):
        if w:
            out += float(w) * values[..., trim + k : n - trim + k]
    return out / h**order


def fd_derivative(field: SolutionField, order: int, accuracy: int = DEFAULT_ACCURACY) -> SolutionField:
    """Centered finite-difference derivative on the interior points only."""
    if not 0 <= order <= 5:
        raise ValueError("derivative order must lie in 0..5")
    r = stencil_radius(order, accuracy)
    if field.values.shape[-1] < 2 * r + 1:
        raise GridTooSmall(f"order {order} needs at least {2 * r + 1} points")
    return SolutionField(
        x=field.x[r : len(field.x) - r],
        values=_apply_stencil(field.values, order, r, field.h, r),
        times=field.times,
        provenance=f"d^{order}/dx^{order} of {field.provenance}",
    )


def fd_jet(values: np.ndarray, h: float, max_order: int, accuracy: int = DEFAULT_ACCURACY):
    """Jet (u, u_1, ..., u_m) on the points where every stencil fits.

    Returns (jet of shape (m+1, N, n_interior), trim) where ``trim`` points
    are dropped at each end.
    """
    trim = max(stencil_radius(k, accuracy) for k in range(max_order + 1))
    if values.shape[-1] < 2 * trim + 1:
        raise GridTooSmall(f"jet of order {max_order} needs at least {2 * trim + 1} points")
    jet = [values[..., trim : values.shape[-1] - trim]]
    for k in range(1, max_order + 1):
        jet.append(_apply_stencil(values, k, stencil_radius(k, accuracy), h, trim))
    return np.stack(jet), trim


# -- closed-form solution families --------------------------------------------


class SolitonFamily:
    def __init__(self, params: SolitonParams):
        self.params = params
        self.n_components = params.n_components
        self.provenance = f"one_soliton(mu={params.mu}, c0={params.c0}, c={list(params.c)})"

    def values(self, times: TimeVector) -> np.ndarray:
        return one_soliton(self.params, times)

    def time_derivative(self, times: TimeVector, n: int) -> np.ndarray:
        return one_soliton_time_derivative(self.params, times, n)

    def x_jet(self, times: TimeVector, order: int) -> np.ndarray:
        return one_soliton_x_derivatives(self.params, times, order)


class BreatherFamily:
    """Rank-s breather.

    ``kernel`` (default) solves the pole condition for the residue directly,
    ``dress`` evaluates the determinant formula literally, ``rank1`` uses the
    s = 1 closed form.
    """

    METHODS = ("kernel", "dress", "rank1")

    def __init__(self, params: BreatherParams, method: str = "kernel"):
        if method not in self.METHODS:
            raise ValueError(f"method must be one of {self.METHODS}")
        self.params = params
        self.method = method
        self.n_components = params.n_components
        self.provenance = f"breather_{method}(mu={params.mu}, s={params.rank})"

    def values(self, times: TimeVector) -> np.ndarray:
        if self.method == "rank1":
            return rank1_breather(self.params, times)
        if self.method == "dress":
            return breather_dress(self.params, times)
        return breather_dress_kernel(self.params, times)

    def time_derivative(self, times: TimeVector, n: int) -> np.ndarray:
        raise NotImplementedError("no analytic xi-derivative for general breathers; use method='fd'")


class OrthonormalBreatherFamily:
    """Rank-one breather with C = e_1 + i e_{j+2}, from its trigonometric closed form."""

    def __init__(self, mu: complex, n_components: int, j: int = 1):
        self.mu = complex(mu)
        self.n_components = n_components
        self.j = j
        self.provenance = f"orthonormal_breather(mu={self.mu}, N={n_components}, j={j})"

    def values(self, times: TimeVector) -> np.ndarray:
        return orthonormal_breather(self.mu, self.n_components, self.j, times)

    def time_derivative(self, times: TimeVector, n: int) -> np.ndarray:
        z = np.asarray(xi(times, self.mu, "breather"))
        d_a, d_b = orthonormal_breather_gradient(abs(self.mu), np.angle(self.mu), z.real, z.imag)
        rate = self.mu ** (2 * n + 1)
        out = np.zeros((self.n_components,) + z.shape)
        out[self.j - 1] = rate.real * d_a + rate.imag * d_b
        return out


def sample(family, grid: Grid, times: TimeVector) -> SolutionField:
    t = times.replace(x=grid.x)
    return SolutionField(x=grid.x, values=family.values(t), times=t, provenance=family.provenance)


def _fd_time_derivative(family, times: TimeVector, n: int, delta: float) -> np.ndarray:
    t0 = np.asarray(times.get(n), dtype=float)
    shifted = {s: family.values(TimeVector({**times.active, n: t0 + s * delta})) for s in (-2, -1, 1, 2)}
    return (-shifted[2] + 8 * shifted[1] - 8 * shifted[-1] + shifted[-2]) / (12 * delta)


def flow_residual(
    family,
    n: int,
    grid: Grid | None = None,
    times: TimeVector | None = None,
    method: str = "analytic_xi",
    delta: float = 1e-4,
    tolerance: float | None = None,
    table: FlowTable | None = None,
    accuracy: int = DEFAULT_ACCURACY,
    precision: str = "extended",
) -> VerificationReport:
    """sup |D_{t_{2n+1}} u - flow(n)(u, u_1, ...)| over interior grid points."""
    grid = grid or Grid()
    times = times or TimeVector()
    table = table or default_table()
    if tolerance is None:
        tolerance = {1: 1e-6, 2: 1e-5}.get(n, 1e-4)
    poly = table.flow(n)
    x = grid.points(precision)
    h = (x[-1] - x[0]) / (len(x) - 1)
    t = times.replace(x=x)
    values = family.values(t)
    jet, trim = fd_jet(values, h, poly.max_order(), accuracy)
    rhs = evaluate_numeric(poly, jet)
    inner = slice(trim, len(x) - trim)
    t_inner = times.replace(x=x[inner])
    if method == "analytic_xi":
        lhs = family.time_derivative(t_inner, n)
    elif method == "fd":
        lhs = _fd_time_derivative(family, t_inner, n, delta)
    else:
        raise ValueError("method must be 'analytic_xi' or 'fd'")
    residual = float(np.max(np.abs(lhs - rhs)))
    return VerificationReport(
        name=f"flow_residual n={n} ({method}) on {family.provenance}",
        max_residual=residual,
        tolerance=tolerance,
        metadata={
            "grid": {"x0": grid.x0, "x1": grid.x1, "nx": grid.nx, "h": grid.h},
            "times": {f"t{2 * k + 1}": _scalar(v) for k, v in times.active.items() if k},
            "method": method,
            "accuracy": accuracy,
            "precision": precision,
            "delta": delta if method == "fd" else None,
            "interior_points": int(len(x) - 2 * trim),
        },
    )


def _scalar(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v.tolist()


@dataclass
class ConvergenceTable:
    h: list
    residual: list
    slope: float
    rows: list = field(default_factory=list)

    def format(self) -> str:
        lines = [f"{'h':>12}  {'residual':>12}"]
        lines += [f"{h:12.4e}  {r:12.4e}" for h, r in zip(self.h, self.residual)]
        lines.append(f"fitted slope: {self.slope:.3f}")
        return "\n".join(lines)


def convergence_study(residual_op, h_values) -> ConvergenceTable:
    """Residual at each spacing and the least-squares slope of log(residual) vs log(h)."""
    h_values = [float(h) for h in h_values]
    if len(h_values) < 3:
        raise ValueError("a convergence study needs at least three spacings")
    ratios = np.diff(np.log(h_values))
    if not np.allclose(ratios, ratios[0], rtol=1e-6):
        raise ValueError("spacings must form a geometric sequence")
    residuals = [float(residual_op(h)) for h in h_values]
    logs = np.log(np.maximum(residuals, np.finfo(float).tiny))
    slope = float(np.polyfit(np.log(h_values), logs, 1)[0])
    return ConvergenceTable(h=h_values, residual=residuals, slope=slope, rows=list(zip(h_values, residuals)))
