r"""Discrete fractional operators on uniform grids.

All left-sided operators use the piecewise-linear interpolant of the samples:

* :func:`rl_integral` -- product trapezoid rule for :math:`I^\alpha_{a+}`,
* :func:`caputo` -- the L1 scheme for :math:`\mathcal{D}^\alpha_{a+}`,
  accurate to :math:`O(h^{2-\alpha})` for smooth data,
* :func:`rl_derivative` -- Caputo plus the boundary kernel term
  :math:`f(a)(t-a)^{-\alpha}/\Gamma(1-\alpha)`,
* :func:`sequential_caputo` -- literal composition, inner order first.

The matrix builders (:func:`caputo_matrix`, :func:`sequential_matrix`,
:func:`regional_laplacian_matrix`) return the same linear maps as dense
arrays, which the solvers assemble into their systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import DomainError, UsageError
from .specfun import gamma

__all__ = [
    "Grid1D",
    "SampledFn",
    "OrderSpec",
    "FracLaplacianSpec",
    "l1_coefficients",
    "rl_integral",
    "caputo",
    "rl_derivative",
    "sequential_caputo",
    "caputo_order12",
    "rl_order12",
    "regional_frac_laplacian",
    "caputo_matrix",
    "sequential_matrix",
    "regional_laplacian_matrix",
    "one_sided_slope",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with ``n`` intervals on ``[a, b]``."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise DomainError(f"grid needs finite a < b, got a={self.a}, b={self.b}")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"grid needs at least 2 intervals, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n + 1)

    @property
    def size(self) -> int:
        return self.n + 1


@dataclass(frozen=True, eq=False)
class SampledFn:
    """Samples of a real function at every node of ``grid``.

    ``values`` is stored as a read-only float64 copy and must be finite,
    except at the node indices listed in ``undefined``: operators with no value
    there (the Riemann-Liouville derivative at ``a``) put a NaN sentinel in
    those positions.
    """

    grid: Grid1D
    values: np.ndarray
    label: str = ""
    undefined: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size != self.grid.size:
            raise UsageError(f"expected {self.grid.size} samples for the grid, got {v.size}")
        ok = np.isfinite(v)
        ok[list(self.undefined)] = True
        if not ok.all():
            bad = int(np.flatnonzero(~ok)[0])
            raise UsageError(f"sample {bad} of '{self.label}' is not finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "undefined", tuple(int(i) for i in self.undefined))

    @classmethod
    def from_callable(cls, grid: Grid1D, fn, label: str = "") -> "SampledFn":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=np.float64) * np.ones(grid.size), label)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values: np.ndarray, label: str | None = None, undefined: tuple[int, ...] = ()) -> "SampledFn":
        return SampledFn(self.grid, values, self.label if label is None else label, undefined)

    def __add__(self, other: "SampledFn") -> "SampledFn":
        _same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "SampledFn") -> "SampledFn":
        _same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c: float) -> "SampledFn":
        return self.with_values(float(c) * self.values)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return float(np.nanmax(np.abs(self.values)))


def _same_grid(f: SampledFn, g: SampledFn) -> None:
    if f.grid != g.grid:
        raise UsageError("sampled functions live on different grids")


def _case_tag(total: float) -> str:
    if abs(total - 1.0) <= 1e-12:
        return "sum_eq_1"
    return "sum_gt_1" if total > 1.0 else "sum_lt_1"


@dataclass(frozen=True)
class OrderSpec:
    """Fractional orders.  ``alpha``, ``beta``, ``gamma_ord`` lie in (0, 1]; ``delta`` in (0, 1)."""

    alpha: float
    beta: float | None = None
    gamma_ord: float | None = None
    delta: float | None = None

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma_ord"):
            v = getattr(self, name)
            if v is not None and not (0.0 < v <= 1.0):
                raise DomainError(f"order {name}={v} must lie in (0, 1]")
        if self.delta is not None and not (0.0 < self.delta < 1.0):
            raise DomainError(f"order delta={self.delta} must lie in (0, 1)")

    @property
    def case_tag(self) -> str:
        """Which branch of the sequential extremum bounds applies."""
        if self.beta is None:
            return "single_order"
        return _case_tag(self.alpha + self.beta)


def laplacian_constant(delta: float, dim: int = 1) -> float:
    """Normalising constant of the (regional) fractional Laplacian in dimension ``dim``."""
    return delta * 2.0 ** (2 * delta) * gamma((dim + 2 * delta) / 2) / (math.pi ** (dim / 2) * gamma(1 - delta))


@dataclass(frozen=True)
class FracLaplacianSpec:
    delta: float
    dim: int = 1
    c_norm: float | None = None
    pv_epsilon_policy: str = "symmetric-cell-exclusion"

    def __post_init__(self) -> None:
        if not (0.0 < self.delta < 1.0):
            raise DomainError(f"fractional Laplacian order delta={self.delta} must lie in (0, 1)")
        if self.dim != 1:
            raise DomainError("only dim = 1 is supported")
        if self.pv_epsilon_policy != "symmetric-cell-exclusion":
            raise DomainError(f"unknown principal-value policy {self.pv_epsilon_policy!r}")
        expected = laplacian_constant(self.delta, self.dim)
        if self.c_norm is None:
            object.__setattr__(self, "c_norm", expected)
        elif not math.isclose(self.c_norm, expected, rel_tol=1e-12):
            raise DomainError(f"c_norm={self.c_norm} disagrees with the closed form {expected}")


def _check_order(alpha: float, name: str = "alpha", allow_one: bool = True) -> float:
    alpha = float(alpha)
    upper_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (alpha > 0.0 and upper_ok):
        bracket = "(0, 1]" if allow_one else "(0, 1)"
        raise DomainError(f"{name}={alpha} must lie in {bracket}")
    return alpha


def l1_coefficients(m: int, alpha: float) -> np.ndarray:
    """L1 weights ``b_j = (j+1)^(1-alpha) - j^(1-alpha)`` for ``j = 0..m-1``."""
    j = np.arange(m, dtype=np.float64)
    b = (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)
    if m:
        # 0**0 evaluates to 1, so alpha = 1 would otherwise lose b_0
        b[0] = 1.0
    return b


def _caputo_values(values: np.ndarray, h: float, alpha: float) -> np.ndarray:
    n = values.size - 1
    out = np.zeros(n + 1)
    diffs = np.diff(values)
    out[1:] = np.convolve(l1_coefficients(n, alpha), diffs)[:n] * (h ** (-alpha) / gamma(2.0 - alpha))
    return out


def caputo(f: SampledFn, alpha: float) -> SampledFn:
    """L1 approximation of the Caputo derivative; the value at ``a`` is 0.

    ``alpha = 1`` is accepted and reduces to the backward difference, which the
    sequential operators and classical-limit runs rely on.
    """
    alpha = _check_order(alpha)
    return f.with_values(_caputo_values(f.values, f.grid.h, alpha), label=f"caputo[{alpha:g}]({f.label})")


def rl_integral(f: SampledFn, alpha: float) -> SampledFn:
    """Product-trapezoid approximation of the Riemann-Liouville integral."""
    alpha = _check_order(alpha)
    n = f.grid.n
    h = f.grid.h
    v = f.values
    m = np.arange(n + 1, dtype=np.float64)
    p = alpha + 1.0
    c = np.empty(n + 1)
    c[0] = 1.0
    c[1:] = (m[1:] + 1.0) ** p - 2.0 * m[1:] ** p + (m[1:] - 1.0) ** p
    conv = np.convolve(c, v)[: n + 1]
    first = (m[1:] - 1.0) ** p - (m[1:] - 1.0 - alpha) * m[1:] ** alpha
    out = np.zeros(n + 1)
    out[1:] = conv[1:] - c[1:] * v[0] + first * v[0]
    out *= h**alpha / gamma(alpha + 2.0)
    out[0] = 0.0
    return f.with_values(out, label=f"rl_integral[{alpha:g}]({f.label})")


def rl_derivative(f: SampledFn, alpha: float) -> SampledFn:
    """Riemann-Liouville derivative as Caputo plus the ``f(a)`` kernel term.

    The value at ``a`` is undefined and returned as NaN.
    """
    alpha = _check_order(alpha, allow_one=False)
    t = f.grid.nodes - f.grid.a
    out = _caputo_values(f.values, f.grid.h, alpha)
    out[1:] += f.values[0] * t[1:] ** (-alpha) / gamma(1.0 - alpha)
    out[0] = np.nan
    return f.with_values(out, label=f"rl_derivative[{alpha:g}]({f.label})", undefined=(0,))


def sequential_caputo(f: SampledFn, alpha: float, beta: float) -> SampledFn:
    """``caputo(caputo(f, beta), alpha)``: order ``beta`` applied first."""
    alpha = _check_order(alpha)
    beta = _check_order(beta, "beta")
    inner = _caputo_values(f.values, f.grid.h, beta)
    out = _caputo_values(inner, f.grid.h, alpha)
    return f.with_values(out, label=f"caputo[{alpha:g}]caputo[{beta:g}]({f.label})")


def one_sided_slope(f: SampledFn) -> float:
    """Second-order one-sided estimate of ``f'(a)``."""
    v = f.values
    return float((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * f.grid.h))


def caputo_order12(f: SampledFn, alpha: float) -> SampledFn:
    """Caputo derivative of order ``1 < alpha < 2`` as L1 of order ``alpha-1`` applied to ``f'``.

    ``f'`` is taken from second-order finite differences of the samples.
    """
    if not (1.0 < alpha < 2.0):
        raise DomainError(f"order alpha={alpha} must lie in (1, 2)")
    deriv = np.gradient(f.values, f.grid.h, edge_order=2)
    out = _caputo_values(deriv, f.grid.h, alpha - 1.0)
    return f.with_values(out, label=f"caputo[{alpha:g}]({f.label})")


def rl_order12(f: SampledFn, alpha: float) -> SampledFn:
    """Riemann-Liouville derivative of order ``1 < alpha < 2``; NaN at ``a``."""
    cap = caputo_order12(f, alpha).values.copy()
    t = f.grid.nodes - f.grid.a
    fa = f.values[0]
    dfa = one_sided_slope(f)
    cap[1:] += fa * t[1:] ** (-alpha) / gamma(1.0 - alpha) + dfa * t[1:] ** (1.0 - alpha) / gamma(2.0 - alpha)
    cap[0] = np.nan
    return f.with_values(cap, label=f"rl_derivative[{alpha:g}]({f.label})", undefined=(0,))


def caputo_matrix(n: int, h: float, alpha: float) -> np.ndarray:
    """Dense ``(n+1) x (n+1)`` lower-triangular matrix of the L1 Caputo scheme (row 0 is zero)."""
    alpha = _check_order(alpha)
    b = l1_coefficients(n, alpha)
    T = toeplitz(b, np.zeros(n))
    D = np.zeros((n, n + 1))
    idx = np.arange(n)
    D[idx, idx + 1] = 1.0
    D[idx, idx] = -1.0
    M = np.zeros((n + 1, n + 1))
    M[1:] = (T @ D) * (h ** (-alpha) / gamma(2.0 - alpha))
    return M


def sequential_matrix(n: int, h: float, alpha: float, beta: float, shifted: bool = False) -> np.ndarray:
    """Matrix of the composed L1 operator (inner ``beta``, outer ``alpha``).

    With ``shifted=False`` this is the ``(n+1) x (n+1)`` product whose row
    ``i`` reproduces :func:`sequential_caputo` at node ``i``.

    With ``shifted=True`` the result has ``n-1`` rows, one per interior node
    ``i = 1..n-1``, and row ``i`` is taken from product row ``i+1``.  That row
    couples node ``i`` to its right neighbour, so a Dirichlet value at ``b``
    reaches the interior.  It has a negative diagonal, non-negative
    off-diagonals and zero row sums, the sign pattern that makes implicit
    schemes built on it satisfy a discrete maximum principle.  It is consistent
    to first order in ``h`` and exactly centred when ``alpha = beta = 1``.
    """
    P = caputo_matrix(n, h, alpha) @ caputo_matrix(n, h, beta)
    if not shifted:
        return P
    return P[2:, :].copy()


def _pair_moments(r0: np.ndarray, r1: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrals of ``r^(-1-2 delta)`` and ``r^(-2 delta)`` over ``[r0, r1]``."""
    m0 = (r0 ** (-2 * delta) - r1 ** (-2 * delta)) / (2 * delta)
    if abs(1.0 - 2.0 * delta) < 1e-14:
        m1 = np.log(r1 / r0)
    else:
        m1 = (r1 ** (1 - 2 * delta) - r0 ** (1 - 2 * delta)) / (1 - 2 * delta)
    return m0, m1


def _cell_weights(n: int, h: float, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Hat-function weights of the cell spanning distances ``[m h, (m+1) h]``, ``m = 1..n``.

    Returns ``(w_near, w_far)``: the weights picked up by the node at distance
    ``m`` and the node at distance ``m + 1``.
    """
    m = np.arange(1, n + 1, dtype=np.float64)
    r0 = m * h
    r1 = r0 + h
    m0, m1 = _pair_moments(r0, r1, delta)
    return (r1 * m0 - m1) / h, (m1 - r0 * m0) / h


def _laplacian_row_weights(n: int, h: float, delta: float, i: int) -> np.ndarray:
    """Weights ``w_j`` with ``value_i = sum_j w_j (f_i - f_j)``, before ``c_norm``.

    An end node (``i = 0`` or ``n``) with ``delta >= 1/2`` gets an infinite
    weight on its neighbour: the one-sided integral diverges there.
    """
    w_near, w_far = _cell_weights(n, h, delta)
    row = np.zeros(n + 1)
    for side, reach in ((1, n - i), (-1, i)):
        if reach == 0:
            continue
        d = np.arange(1, reach + 1)
        contrib = np.zeros(reach)
        has_cell = d + 1 <= reach
        contrib[has_cell] += w_near[d[has_cell] - 1]
        contrib[1:] += w_far[: reach - 1]
        if 0 < i < n:
            contrib[0] += h ** (-2 * delta) / (2.0 - 2.0 * delta)
        elif delta < 0.5:
            contrib[0] += h ** (-2 * delta) / (1.0 - 2.0 * delta)
        else:
            contrib[0] = math.inf
        row[i + side * d] += contrib
    return row


def regional_laplacian_matrix(grid: Grid1D, spec: FracLaplacianSpec) -> np.ndarray:
    """Interior rows of the regional fractional Laplacian: shape ``(n-1, n+1)``.

    Row sums are zero up to rounding, diagonal entries positive and
    off-diagonal entries negative.
    """
    n, h = grid.n, grid.h
    K = np.zeros((n - 1, n + 1))
    for i in range(1, n):
        w = _laplacian_row_weights(n, h, spec.delta, i)
        K[i - 1] = -w
        K[i - 1, i] = w.sum()
    return spec.c_norm * K


def regional_frac_laplacian(f: SampledFn, spec: FracLaplacianSpec) -> SampledFn:
    """Regional fractional Laplacian of the sampled function over ``(grid.a, grid.b)``.

    Far cells integrate the linear interpolant against exact kernel moments.
    The singular cell pair around an interior node uses the quadratic through
    the node and its two neighbours; its odd part cancels in the principal
    value.  At the two end nodes the integral is one-sided.  For
    ``delta >= 1/2`` it converges there only when the adjacent slope is zero,
    and the value is NaN otherwise.
    """
    n, h = f.grid.n, f.grid.h
    v = f.values
    out = np.zeros(n + 1)
    for i in range(n + 1):
        w = _laplacian_row_weights(n, h, spec.delta, i)
        diff = v[i] - v
        singular = np.isinf(w)
        if singular.any():
            if np.any(diff[singular] != 0.0):
                out[i] = np.nan
                continue
            w = np.where(singular, 0.0, w)
        out[i] = spec.c_norm * np.dot(w, diff)
    return SampledFn(
        f.grid,
        out,
        label=f"regional_laplacian[{spec.delta:g}]({f.label})",
        undefined=tuple(np.flatnonzero(np.isnan(out))),
    )
