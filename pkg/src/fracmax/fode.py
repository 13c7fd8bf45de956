"""Sequential fractional ODEs: implicit L1 marching, comparison and sandwich checks.

Each term ``lambda * D^alpha D^beta u`` is split into the pair
``v = D^beta u`` and ``D^alpha v``.  Both L1 sums are assembled from history at
every node, which leaves a small linear system in the current values.  That
system is solved in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DivergenceError, DomainError, SolverError, UsageError
from .fracops import Grid1D, SampledFn, _case_tag, l1_coefficients, sequential_matrix
from .report import VerificationReport
from .specfun import gamma

__all__ = [
    "LinearSFODE",
    "MultiTermSFODE",
    "SandwichSpec",
    "solve_linear",
    "solve_linear_two_point",
    "compare_linear",
    "solve_multiterm",
    "sandwich_check",
    "sign_check",
]

Forcing = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _orders_ok(alpha: float, beta: float) -> None:
    if not (0.0 < alpha <= 1.0 and 0.0 < beta <= 1.0):
        raise DomainError(f"orders must lie in (0, 1], got alpha={alpha}, beta={beta}")


@dataclass(frozen=True)
class LinearSFODE:
    """``D^alpha D^beta u + q u = f`` with ``u(a) = u_a`` and ``D^beta u(a) = v_a``."""

    grid: Grid1D
    alpha: float
    beta: float
    q: SampledFn
    f: SampledFn
    u_a: float = 0.0
    v_a: float = 0.0

    def __post_init__(self) -> None:
        _orders_ok(self.alpha, self.beta)
        if self.q.grid != self.grid or self.f.grid != self.grid:
            raise UsageError("q and f must be sampled on the problem grid")

    @property
    def case_tag(self) -> str:
        return _case_tag(self.alpha + self.beta)

    def hypotheses(self) -> list[str]:
        """Reasons the sign theorem does not apply; empty when it does."""
        out = []
        if not (0.0 < self.alpha < 1.0 and 0.0 < self.beta < 1.0):
            out.append("alpha and beta must lie in (0, 1)")
        if not 1.0 < self.alpha + self.beta <= 2.0:
            out.append("alpha + beta must lie in (1, 2]")
        if np.any(self.q.values > 0):
            out.append("q must be non-positive")
        if self.q.values[0] == 0:
            out.append("q(a) must be non-zero")
        return out


@dataclass(frozen=True)
class MultiTermSFODE:
    """``sum_j lambda_j D^alpha_j D^beta_j u + F(x, u) = 0`` with ``u(a) = u_a``.

    ``F`` is called with node arrays ``x`` and ``u`` and must return an array.
    """

    grid: Grid1D
    terms: tuple[tuple[float, float, float], ...]
    F: Forcing
    u_a: float = 0.0
    picard_tol: float = 1e-10
    picard_max: int = 100

    def __post_init__(self) -> None:
        if not self.terms:
            raise DomainError("at least one term is required")
        for lam, al, be in self.terms:
            if lam < 0:
                raise DomainError(f"lambda_j must be non-negative, got {lam}")
            _orders_ok(al, be)
            if not 1.0 < al + be <= 2.0:
                raise DomainError(f"alpha_j + beta_j must lie in (1, 2], got {al + be}")
        if sum(lam for lam, _, _ in self.terms) == 0:
            raise DomainError("all lambda_j vanish; the equation has no derivative term")
        object.__setattr__(self, "terms", tuple(tuple(map(float, t)) for t in self.terms))


@dataclass(frozen=True)
class SandwichSpec:
    """Linear envelopes ``mu2 u + q2(x) <= F(x, u) <= mu1 u + q1(x)`` with ``mu1, mu2 < 0``."""

    mu1: float
    mu2: float
    q1: SampledFn
    q2: SampledFn
    F: Forcing
    lattice: int = 101

    def __post_init__(self) -> None:
        if not (self.mu1 < 0 and self.mu2 < 0):
            raise DomainError(f"mu1 and mu2 must be negative, got {self.mu1}, {self.mu2}")


def _march(
    grid: Grid1D,
    terms: tuple[tuple[float, float, float], ...],
    q: np.ndarray,
    f: np.ndarray,
    u_a: float,
    v_a: tuple[float, ...],
) -> np.ndarray:
    """Implicit L1 march of ``sum_j lam_j D^a_j v_j + q u = f`` with ``v_j = D^b_j u``."""
    n, h = grid.n, grid.h
    m = len(terms)
    lam = np.array([t[0] for t in terms])
    ca = np.array([h ** (-t[1]) / gamma(2.0 - t[1]) for t in terms])
    cb = np.array([h ** (-t[2]) / gamma(2.0 - t[2]) for t in terms])
    ba = [l1_coefficients(n, t[1]) for t in terms]
    bb = [l1_coefficients(n, t[2]) for t in terms]
    u = np.empty(n + 1)
    u[0] = u_a
    du = np.empty(n)
    v = np.empty((m, n + 1))
    v[:, 0] = v_a
    dv = np.empty((m, n))
    lead = float(np.sum(lam * ca * cb))
    for k in range(1, n + 1):
        rest = 0.0
        rb = np.empty(m)
        for j in range(m):
            # inner: v_k = cb*u_k + rb, with the history of u differences in rb
            hist_b = cb[j] * np.dot(bb[j][1:k], du[k - 2 :: -1]) if k > 1 else 0.0
            rb[j] = hist_b - cb[j] * u[k - 1]
            hist_a = ca[j] * np.dot(ba[j][1:k], dv[j, k - 2 :: -1]) if k > 1 else 0.0
            rest += lam[j] * (hist_a - ca[j] * v[j, k - 1] + ca[j] * rb[j])
        det = lead + q[k]
        if det == 0.0 or not np.isfinite(det):
            raise SolverError(f"singular local system at node {k} (determinant {det})")
        u[k] = (f[k] - rest) / det
        if not np.isfinite(u[k]):
            raise DivergenceError(f"non-finite solution value at node {k}", index=k, residual=float("inf"))
        du[k - 1] = u[k] - u[k - 1]
        v[:, k] = cb * u[k] + rb
        dv[:, k - 1] = v[:, k] - v[:, k - 1]
    return u


def solve_linear(p: LinearSFODE) -> SampledFn:
    """Marching solution of the linear initial value problem."""
    u = _march(p.grid, ((1.0, p.alpha, p.beta),), p.q.values, p.f.values, p.u_a, (p.v_a,))
    return SampledFn(p.grid, u, label="u")


def solve_linear_two_point(p: LinearSFODE, u_b: float) -> SampledFn:
    """Two-point variant: ``u(a) = u_a`` and ``u(b) = u_b`` instead of ``D^beta u(a) = v_a``.

    Uses the shifted composed L1 matrix on the interior, whose sign pattern
    carries a discrete maximum principle.  Not the initial value problem
    solved by :func:`solve_linear`; offered for comparison.
    """
    n = p.grid.n
    M = sequential_matrix(n, p.grid.h, p.alpha, p.beta, shifted=True)
    A = M[:, 1:n] + np.diag(p.q.values[1:n])
    rhs = p.f.values[1:n] - M[:, 0] * p.u_a - M[:, n] * u_b
    u = np.empty(n + 1)
    u[0], u[n] = p.u_a, u_b
    u[1:n] = np.linalg.solve(A, rhs)
    return SampledFn(p.grid, u, label="u")


def sign_check(p: LinearSFODE, u: SampledFn | None = None, tol: float | None = None) -> VerificationReport:
    """``u <= 0`` for ``q <= 0``, ``q(a) != 0`` and ``f >= 0``.

    Reported as informational when the hypotheses fail, including the case
    ``u(a) > 0``.
    """
    if u is None:
        u = solve_linear(p)
    if tol is None:
        tol = 1e-6 * (1.0 + p.f.sup_norm())
    problems = p.hypotheses()
    if np.any(p.f.values[1:] < 0):
        problems.append("f must be non-negative")
    if p.u_a > 0:
        problems.append("u(a) > 0")
    k = int(np.argmax(u.values))
    value = float(u.values[k])
    return VerificationReport(
        principle="ode_sign",
        value=value,
        bound=0.0,
        margin=-value,
        tolerance=tol,
        location=(float(u.nodes[k]),),
        status="informational" if problems else "checked",
        details={"hypotheses_failed": problems, "u_a": p.u_a, "case_tag": p.case_tag},
    )


def compare_linear(p1: LinearSFODE, p2: LinearSFODE, tol: float | None = None) -> VerificationReport:
    """Solve both problems and test ``u1 <= u2`` node-wise when ``f1 <= f2``."""
    same = (
        p1.grid == p2.grid
        and p1.alpha == p2.alpha
        and p1.beta == p2.beta
        and np.array_equal(p1.q.values, p2.q.values)
        and p1.u_a == p2.u_a
        and p1.v_a == p2.v_a
    )
    if not same:
        raise UsageError("compared problems must share grid, orders, q and initial data")
    if tol is None:
        tol = 1e-6 * (1.0 + max(p1.f.sup_norm(), p2.f.sup_norm()))
    u1 = solve_linear(p1).values
    u2 = solve_linear(p2).values
    gap = u1 - u2
    k = int(np.argmax(gap))
    problems = p1.hypotheses()
    if np.any(p1.f.values > p2.f.values):
        problems.append("f1 <= f2 violated")
    return VerificationReport(
        principle="ode_comparison",
        value=float(gap[k]),
        bound=0.0,
        margin=-float(gap[k]),
        tolerance=tol,
        location=(float(p1.grid.nodes[k]),),
        status="informational" if problems else "checked",
        details={"hypotheses_failed": problems},
    )


def solve_multiterm(p: MultiTermSFODE, initial_guess: SampledFn | None = None) -> SampledFn:
    """Picard iteration: march ``sum_j lambda_j D D u^(k+1) = -F(x, u^k)`` to convergence."""
    x = p.grid.nodes
    u = np.full(p.grid.n + 1, p.u_a) if initial_guess is None else initial_guess.values.copy()
    zero_q = np.zeros_like(x)
    v_a = tuple(0.0 for _ in p.terms)
    diff = np.inf
    for _ in range(p.picard_max):
        forcing = -np.asarray(p.F(x, u), dtype=np.float64)
        if not np.all(np.isfinite(forcing)):
            raise DivergenceError("F returned non-finite values during Picard iteration", index=-1, residual=diff)
        new = _march(p.grid, p.terms, zero_q, forcing, p.u_a, v_a)
        diff = float(np.max(np.abs(new - u)))
        u = new
        if diff < p.picard_tol:
            return SampledFn(p.grid, u, label="u")
    raise DivergenceError(f"Picard iteration did not converge in {p.picard_max} steps", index=p.picard_max, residual=diff)


def _envelope_violations(s: SandwichSpec, x: np.ndarray, lo: float, hi: float) -> list[tuple[float, float]]:
    levels = np.linspace(lo, hi, s.lattice)
    X, U = np.meshgrid(x, levels, indexing="ij")
    Fv = np.asarray(s.F(X, U), dtype=np.float64)
    upper = s.mu1 * U + s.q1.values[:, None]
    lower = s.mu2 * U + s.q2.values[:, None]
    slack = 1e-12 * (1.0 + np.abs(Fv))
    bad = (Fv > upper + slack) | (Fv < lower - slack)
    idx = np.argwhere(bad)
    return [(float(X[i, j]), float(U[i, j])) for i, j in idx[:10]]


def sandwich_check(s: SandwichSpec, p: MultiTermSFODE, tol: float | None = None) -> VerificationReport:
    """Solve the nonlinear problem and both linear envelopes, then test ``u2 <= u <= u1``.

    The envelope inequality is sampled on a lattice spanning the computed
    solution range widened by one on each side; violations raise
    :class:`UsageError` naming the offending ``(x, u)`` pairs.
    """
    if len(p.terms) != 1 or p.terms[0][0] != 1.0 or p.terms[0][1] != p.terms[0][2]:
        raise UsageError("sandwich check needs a single unit-weight term with alpha = beta")
    if s.q1.grid != p.grid or s.q2.grid != p.grid:
        raise UsageError("envelope data must share the problem grid")
    _, alpha, beta = p.terms[0]
    u = solve_multiterm(p).values
    bad = _envelope_violations(s, p.grid.nodes, float(u.min()) - 1.0, float(u.max()) + 1.0)
    if bad:
        shown = ", ".join(f"(x={a:.4g}, u={b:.4g})" for a, b in bad)
        raise UsageError(f"envelope contract violated at {shown}")
    # D D u_i - mu_i u_i - q_i = 0  <=>  D D u_i + (-mu_i) u_i = q_i
    grid = p.grid
    up = LinearSFODE(grid, alpha, beta, SampledFn(grid, np.full(grid.n + 1, -s.mu1)), s.q1, p.u_a)
    lo = LinearSFODE(grid, alpha, beta, SampledFn(grid, np.full(grid.n + 1, -s.mu2)), s.q2, p.u_a)
    u1 = solve_linear(up).values
    u2 = solve_linear(lo).values
    above = u - u1
    below = u2 - u
    # envelopes written as D D w + mu_i w + q_i = 0, the same form as the nonlinear equation
    c1 = solve_linear(LinearSFODE(grid, alpha, beta, SampledFn(grid, np.full(grid.n + 1, s.mu1)), s.q1 * -1.0, p.u_a)).values
    c2 = solve_linear(LinearSFODE(grid, alpha, beta, SampledFn(grid, np.full(grid.n + 1, s.mu2)), s.q2 * -1.0, p.u_a)).values
    worst = np.maximum(above, below)
    k = int(np.argmax(worst))
    if tol is None:
        tol = 1e-6 * (1.0 + float(np.max(np.abs(u))))
    return VerificationReport(
        principle="ode_sandwich",
        value=float(worst[k]),
        bound=0.0,
        margin=-float(worst[k]),
        tolerance=tol,
        location=(float(grid.nodes[k]),),
        details={
            "upper_excess": float(above.max()),
            "lower_excess": float(below.max()),
            # how far the opposite ordering u1 <= u <= u2 is from holding
            "reversed_excess": float(max((u1 - u).max(), (u - u2).max())),
            "u_range": [float(u.min()), float(u.max())],
            "same_form_upper_excess": float((u - c1).max()),
            "same_form_reversed_excess": float(max((c1 - u).max(), (u - c2).max())),
        },
    )
