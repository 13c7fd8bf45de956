"""Time-space fractional diffusion and pseudo-parabolic equations on an interval.

Space: the composed L1 operator for ``D^beta1 D^beta2`` in its shifted form,
so that both Dirichlet values enter the interior rows.  Its matrix has
non-negative off-diagonals and zero row sums.

Time, diffusion: L1 Caputo of order ``alpha``.  The step matrix
``c I - nu S`` is then an M-matrix and the history enters with positive
weights, so the discrete scheme inherits the maximum principle.

Time, pseudo-parabolic: backward Euler for ``u_t``.  The Riemann-Liouville
derivative of order ``1 - alpha`` acting on ``w = S u`` is taken as L1 Caputo
of the history of ``w`` plus the kernel term of ``w(0)``.  At ``alpha = 1``
it reduces exactly to ``w``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import DivergenceError, DomainError, SolverError, UsageError
from .fracops import Grid1D, SampledFn, l1_coefficients, sequential_matrix
from .report import VerificationReport
from .specfun import gamma

__all__ = [
    "DiffusionProblem",
    "PseudoParabolicProblem",
    "SolutionField",
    "solve_diffusion",
    "solve_pseudo_parabolic",
    "verify_parabolic_min_principle",
    "verify_parabolic_max_principle",
    "verify_sign_corollaries",
    "continuous_dependence_experiment",
    "nonlinear_uniqueness_check",
    "verify_pseudo_principles",
]


def _validate(p) -> None:
    if not 0.0 < p.alpha <= 1.0:
        raise DomainError(f"alpha={p.alpha} must lie in (0, 1]")
    for name in ("beta1", "beta2"):
        v = getattr(p, name)
        if not 0.0 < v <= 1.0:
            raise DomainError(f"{name}={v} must lie in (0, 1]")
    if not 1.0 < p.beta1 + p.beta2 <= 2.0:
        raise DomainError(f"beta1 + beta2 = {p.beta1 + p.beta2} must lie in (1, 2]")
    if not p.nu > 0:
        raise DomainError(f"nu={p.nu} must be positive")
    if p.tgrid.a != 0.0:
        raise DomainError("time grid must start at t = 0")
    if p.phi.grid != p.xgrid:
        raise UsageError("initial data must be sampled on the spatial grid")
    left, right = p.boundary()
    if left.grid != p.tgrid or right.grid != p.tgrid:
        raise UsageError("boundary data must be sampled on the time grid")
    if abs(p.phi.values[0] - left.values[0]) > 1e-12 or abs(p.phi.values[-1] - right.values[0]) > 1e-12:
        warnings.warn("initial and boundary data disagree at a corner", stacklevel=3)


@dataclass(frozen=True)
class DiffusionProblem:
    """``D_t^alpha u = nu D_x^beta1 D_x^beta2 u + F`` with initial and Dirichlet data.

    ``F`` is called as ``F(x, t)`` with an array of interior nodes and a
    scalar time, or as ``F(x, t, u)`` when ``nonlinear`` is set.
    """

    xgrid: Grid1D
    tgrid: Grid1D
    alpha: float
    beta1: float
    beta2: float
    nu: float
    F: Callable
    phi: SampledFn
    psi_a: SampledFn
    psi_b: SampledFn
    nonlinear: bool = False
    picard_tol: float = 1e-10
    picard_max: int = 50

    def __post_init__(self) -> None:
        _validate(self)

    def boundary(self) -> tuple[SampledFn, SampledFn]:
        return self.psi_a, self.psi_b


@dataclass(frozen=True)
class PseudoParabolicProblem:
    """``u_t = nu D_t^(1-alpha) D_x^beta1 D_x^beta2 u + F`` (Riemann-Liouville in time)."""

    xgrid: Grid1D
    tgrid: Grid1D
    alpha: float
    beta1: float
    beta2: float
    nu: float
    F: Callable
    phi: SampledFn
    psi1: SampledFn
    psi2: SampledFn
    nonlinear: bool = False
    picard_tol: float = 1e-10
    picard_max: int = 50

    def __post_init__(self) -> None:
        _validate(self)

    def boundary(self) -> tuple[SampledFn, SampledFn]:
        return self.psi1, self.psi2


@dataclass(frozen=True, eq=False)
class SolutionField:
    """Values ``u[m, i]`` at time ``tgrid.nodes[m]`` and position ``xgrid.nodes[i]``."""

    xgrid: Grid1D
    tgrid: Grid1D
    values: np.ndarray
    scheme_meta: str = ""

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (self.tgrid.size, self.xgrid.size):
            raise UsageError(f"field shape {v.shape} does not match grids ({self.tgrid.size}, {self.xgrid.size})")
        if not np.all(np.isfinite(v)):
            raise DivergenceError("solution field has non-finite values", index=-1, residual=math.inf)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _forcing(p, x: np.ndarray, t: float, u: np.ndarray | None) -> np.ndarray:
    out = p.F(x, t, u) if p.nonlinear else p.F(x, t)
    return np.broadcast_to(np.asarray(out, dtype=np.float64), x.shape)


def _factor(A: np.ndarray):
    lu = lu_factor(A, check_finite=False)
    if np.any(np.diag(lu[0]) == 0.0):
        raise SolverError("singular step matrix at time index 1")
    return lu


def _implicit_level(p, lu, base: np.ndarray, x: np.ndarray, t: float, start: np.ndarray, m: int) -> np.ndarray:
    """Solve ``A u = base + F(x, t, u)``, by Picard when ``F`` depends on ``u``."""
    if not p.nonlinear:
        return lu_solve(lu, base + _forcing(p, x, t, None))
    u = start
    diff = math.inf
    for _ in range(p.picard_max):
        new = lu_solve(lu, base + _forcing(p, x, t, u))
        diff = float(np.max(np.abs(new - u))) if new.size else 0.0
        u = new
        if diff < p.picard_tol:
            return u
    raise DivergenceError(f"Picard iteration stalled at time index {m}", index=m, residual=diff)


def _start(prev: np.ndarray, picard_start: float | None) -> np.ndarray:
    return prev.copy() if picard_start is None else np.full_like(prev, picard_start)


def solve_diffusion(p: DiffusionProblem, picard_start: float | None = None) -> SolutionField:
    """Implicit L1 time stepping; dense LU of the constant step matrix.

    ``picard_start`` sets the first Picard iterate at every level (default:
    the previous level).  Used for uniqueness experiments.
    """
    n, nt = p.xgrid.n, p.tgrid.n
    x = p.xgrid.nodes[1:n]
    times = p.tgrid.nodes
    S = sequential_matrix(n, p.xgrid.h, p.beta1, p.beta2, shifted=True)
    ct = p.tgrid.h ** (-p.alpha) / gamma(2.0 - p.alpha)
    bt = l1_coefficients(nt, p.alpha)
    lu = _factor(ct * np.eye(n - 1) - p.nu * S[:, 1:n])
    U = np.empty((nt + 1, n + 1))
    U[0] = p.phi.values
    U[1:, 0] = p.psi_a.values[1:]
    U[1:, n] = p.psi_b.values[1:]
    dU = np.empty((nt, n - 1))
    for m in range(1, nt + 1):
        # L1 history of the interior values, newest difference first
        hist = ct * (bt[1:m] @ dU[m - 2 :: -1]) if m > 1 else 0.0
        base = ct * U[m - 1, 1:n] - hist + p.nu * (S[:, 0] * U[m, 0] + S[:, n] * U[m, n])
        U[m, 1:n] = _implicit_level(p, lu, base, x, times[m], _start(U[m - 1, 1:n], picard_start), m)
        dU[m - 1] = U[m, 1:n] - U[m - 1, 1:n]
        if not np.all(np.isfinite(U[m])):
            raise DivergenceError(f"non-finite values at time index {m}", index=m, residual=math.inf)
    meta = (
        f"diffusion: L1 time alpha={p.alpha:g}; shifted composed L1 space beta1={p.beta1:g} beta2={p.beta2:g}; "
        f"nu={p.nu:g}; n_x={n} n_t={nt}; dense LU" + ("; per-step Picard" if p.nonlinear else "")
    )
    return SolutionField(p.xgrid, p.tgrid, U, meta)


def solve_pseudo_parabolic(p: PseudoParabolicProblem, picard_start: float | None = None) -> SolutionField:
    """Backward Euler in time with the Riemann-Liouville history of the spatial operator."""
    n, nt = p.xgrid.n, p.tgrid.n
    x = p.xgrid.nodes[1:n]
    dt = p.tgrid.h
    times = p.tgrid.nodes
    S = sequential_matrix(n, p.xgrid.h, p.beta1, p.beta2, shifted=True)
    order = 1.0 - p.alpha
    cg = dt ** (-order) / gamma(2.0 - order)
    bg = l1_coefficients(nt, order)
    lu = _factor(np.eye(n - 1) / dt - p.nu * cg * S[:, 1:n])
    U = np.empty((nt + 1, n + 1))
    U[0] = p.phi.values
    U[1:, 0] = p.psi1.values[1:]
    U[1:, n] = p.psi2.values[1:]
    W = np.empty((nt + 1, n - 1))
    W[0] = S @ U[0]
    dW = np.empty((nt, n - 1))
    for m in range(1, nt + 1):
        hist = cg * (bg[1:m] @ dW[m - 2 :: -1]) if m > 1 else 0.0
        kernel = times[m] ** (p.alpha - 1.0) / gamma(p.alpha)
        known_w = S[:, 0] * U[m, 0] + S[:, n] * U[m, n]
        base = U[m - 1, 1:n] / dt + p.nu * (cg * (known_w - W[m - 1]) + hist + kernel * W[0])
        U[m, 1:n] = _implicit_level(p, lu, base, x, times[m], _start(U[m - 1, 1:n], picard_start), m)
        W[m] = S @ U[m]
        dW[m - 1] = W[m] - W[m - 1]
        if not np.all(np.isfinite(U[m])):
            raise DivergenceError(f"non-finite values at time index {m}", index=m, residual=math.inf)
    meta = (
        f"pseudo-parabolic: backward Euler, RL order {order:g} via L1 history; shifted composed L1 space "
        f"beta1={p.beta1:g} beta2={p.beta2:g}; nu={p.nu:g}; n_x={n} n_t={nt}; dense LU"
        + ("; per-step Picard" if p.nonlinear else "")
    )
    return SolutionField(p.xgrid, p.tgrid, U, meta)


def _boundary_data(p) -> np.ndarray:
    left, right = p.boundary()
    return np.concatenate([p.phi.values, left.values, right.values])


def _forcing_samples(p, u: SolutionField | None = None) -> np.ndarray:
    """``F`` on the full space-time grid; nonlinear ``F`` is evaluated along ``u``."""
    x = p.xgrid.nodes
    rows = []
    for m, t in enumerate(p.tgrid.nodes):
        state = u.values[m] if (p.nonlinear and u is not None) else np.zeros_like(x)
        rows.append(_forcing(p, x, t, state))
    return np.array(rows)


def _scale(p, Fs: np.ndarray) -> float:
    return 1.0 + max(float(np.max(np.abs(_boundary_data(p)))), float(np.max(np.abs(Fs))))


def _argext(values: np.ndarray, kind: str, field: SolutionField) -> tuple[float, tuple[float, float]]:
    idx = np.argmin(values) if kind == "min" else np.argmax(values)
    m, i = np.unravel_index(idx, values.shape)
    return float(values[m, i]), (float(field.xgrid.nodes[i]), float(field.tgrid.nodes[m]))


def _principle(u: SolutionField, p, kind: str, tol: float | None, name: str) -> VerificationReport:
    Fs = _forcing_samples(p, u)
    if tol is None:
        tol = 1e-6 * _scale(p, Fs)
    data = _boundary_data(p)
    value, loc = _argext(u.values, kind, u)
    if kind == "min":
        bound = float(data.min())
        margin = value - bound
        holds = bool(np.all(Fs >= 0))
        need = "F >= 0"
    else:
        bound = float(data.max())
        margin = bound - value
        holds = bool(np.all(Fs <= 0))
        need = "F <= 0"
    return VerificationReport(
        principle=name,
        value=value,
        bound=bound,
        margin=margin,
        tolerance=tol,
        location=loc,
        status="checked" if holds and not p.nonlinear else "informational",
        details={"hypothesis": need, "hypothesis_holds": holds},
    )


def verify_parabolic_min_principle(u: SolutionField, p: DiffusionProblem, tol: float | None = None) -> VerificationReport:
    """Grid minimum against the minimum over the parabolic boundary; applies when ``F >= 0``."""
    return _principle(u, p, "min", tol, "diffusion_min")


def verify_parabolic_max_principle(u: SolutionField, p: DiffusionProblem, tol: float | None = None) -> VerificationReport:
    """Mirror of :func:`verify_parabolic_min_principle` for ``F <= 0``."""
    return _principle(u, p, "max", tol, "diffusion_max")


def verify_sign_corollaries(u: SolutionField, p: DiffusionProblem, tol: float | None = None) -> list[VerificationReport]:
    """``u >= 0`` under non-negative data and forcing, and ``u <= 0`` under non-positive."""
    Fs = _forcing_samples(p, u)
    data = _boundary_data(p)
    if tol is None:
        tol = 1e-6 * _scale(p, Fs)
    out = []
    lo, lo_loc = _argext(u.values, "min", u)
    hi, hi_loc = _argext(u.values, "max", u)
    nonneg = bool(np.all(Fs >= 0) and np.all(data >= 0)) and not p.nonlinear
    nonpos = bool(np.all(Fs <= 0) and np.all(data <= 0)) and not p.nonlinear
    out.append(VerificationReport("diffusion_nonnegative", lo, 0.0, lo, tol, lo_loc, "checked" if nonneg else "informational"))
    out.append(VerificationReport("diffusion_nonpositive", hi, 0.0, -hi, tol, hi_loc, "checked" if nonpos else "informational"))
    return out


def _homogeneous(p, phi: SampledFn):
    zero = SampledFn(p.tgrid, np.zeros(p.tgrid.size), "0")
    if isinstance(p, DiffusionProblem):
        return replace(p, phi=phi, psi_a=zero, psi_b=zero)
    return replace(p, phi=phi, psi1=zero, psi2=zero)


def _solver(p):
    return solve_diffusion if isinstance(p, DiffusionProblem) else solve_pseudo_parabolic


def continuous_dependence_experiment(p: DiffusionProblem, phi_bar: SampledFn, tol: float = 1e-6) -> VerificationReport:
    """``sup |u - ubar| <= |phi - phibar|_inf`` with zero Dirichlet data for both solves."""
    if phi_bar.grid != p.xgrid:
        raise UsageError("perturbed initial data must share the spatial grid")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u = solve_diffusion(_homogeneous(p, p.phi)).values
        ub = solve_diffusion(_homogeneous(p, phi_bar)).values
    gap = np.abs(u - ub)
    m, i = np.unravel_index(np.argmax(gap), gap.shape)
    bound = float(np.max(np.abs(p.phi.values - phi_bar.values)))
    value = float(gap[m, i])
    return VerificationReport(
        principle="diffusion_continuous_dependence",
        value=value,
        bound=bound,
        margin=bound - value,
        tolerance=tol,
        location=(float(p.xgrid.nodes[i]), float(p.tgrid.nodes[m])),
        status="informational" if p.nonlinear else "checked",
    )


def _nonincreasing(p, field: SolutionField) -> bool:
    """Sample ``dF/du <= 0`` on a lattice spanning the solution range widened by one."""
    lo, hi = float(field.values.min()) - 1.0, float(field.values.max()) + 1.0
    levels = np.linspace(lo, hi, 41)
    x = p.xgrid.nodes
    for t in p.tgrid.nodes[:: max(1, p.tgrid.n // 16)]:
        vals = np.array([_forcing(p, x, t, np.full_like(x, s)) for s in levels])
        if np.any(np.diff(vals, axis=0) > 1e-12 * (1.0 + np.abs(vals[1:]))):
            return False
    return True


def nonlinear_uniqueness_check(
    p, g2: SampledFn, agree_tol: float = 1e-8, tol: float = 1e-6
) -> list[VerificationReport]:
    """Two-guess agreement and initial-data stability for ``F`` non-increasing in ``u``.

    The first report compares solves whose Picard iterations start from the
    previous level and from a far-off constant.  The second compares solves
    from ``phi`` and ``g2`` under zero Dirichlet data against ``|phi - g2|_inf``.
    Works for both equation families.
    """
    if not p.nonlinear:
        raise UsageError("uniqueness check needs a nonlinear problem")
    solve = _solver(p)
    u1 = solve(p)
    far = float(np.max(np.abs(u1.values))) + 0.5
    u2 = solve(p, picard_start=far)
    status = "checked" if _nonincreasing(p, u1) else "informational"
    diff = float(np.max(np.abs(u1.values - u2.values)))
    prefix = "diffusion" if isinstance(p, DiffusionProblem) else "pseudo"
    first = VerificationReport(
        f"{prefix}_nonlinear_uniqueness", diff, 0.0, -diff, agree_tol, (), status, {"picard_start": far}
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = solve(_homogeneous(p, p.phi)).values
        b = solve(_homogeneous(p, g2)).values
    gap = float(np.max(np.abs(a - b)))
    bound = float(np.max(np.abs(p.phi.values - g2.values)))
    second = VerificationReport(f"{prefix}_nonlinear_stability", gap, bound, bound - gap, tol, (), status)
    return [first, second]


def verify_pseudo_principles(
    u: SolutionField, p: PseudoParabolicProblem, phi_bar: SampledFn | None = None, tol: float | None = None
) -> list[VerificationReport]:
    """Sign, boundary-extremum, uniqueness and stability reports for the pseudo-parabolic problem.

    Sign and boundary-extremum reports count only when their data-sign
    hypotheses hold.  Uniqueness for a linear problem demands a bit-identical
    re-solve.  Stability needs ``phi_bar`` and uses the problem's own boundary
    data for both solves.
    """
    Fs = _forcing_samples(p, u)
    data = _boundary_data(p)
    if tol is None:
        tol = 1e-6 * _scale(p, Fs)
    linear = not p.nonlinear
    lo, lo_loc = _argext(u.values, "min", u)
    hi, hi_loc = _argext(u.values, "max", u)
    f_nonneg, f_nonpos = bool(np.all(Fs >= 0)), bool(np.all(Fs <= 0))

    def status(ok: bool) -> str:
        return "checked" if ok and linear else "informational"

    reports = [
        VerificationReport("pseudo_nonnegative", lo, 0.0, lo, tol, lo_loc, status(f_nonneg and bool(np.all(data >= 0)))),
        VerificationReport("pseudo_nonpositive", hi, 0.0, -hi, tol, hi_loc, status(f_nonpos and bool(np.all(data <= 0)))),
        VerificationReport("pseudo_boundary_min", lo, float(data.min()), lo - float(data.min()), tol, lo_loc, status(f_nonneg)),
        VerificationReport("pseudo_boundary_max", hi, float(data.max()), float(data.max()) - hi, tol, hi_loc, status(f_nonpos)),
    ]
    if linear:
        again = solve_pseudo_parabolic(p).values
        diff = float(np.max(np.abs(again - u.values)))
        reports.append(VerificationReport("pseudo_uniqueness", diff, 0.0, -diff, 0.0, ()))
    if phi_bar is not None:
        if phi_bar.grid != p.xgrid:
            raise UsageError("perturbed initial data must share the spatial grid")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ub = solve_pseudo_parabolic(replace(p, phi=phi_bar)).values
        gap = float(np.max(np.abs(u.values - ub)))
        bound = float(np.max(np.abs(p.phi.values - phi_bar.values)))
        reports.append(
            VerificationReport("pseudo_stability", gap, bound, bound - gap, 1e-6, (), "checked" if linear else "informational")
        )
    return reports
