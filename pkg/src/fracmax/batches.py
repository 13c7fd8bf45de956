"""Seeded random verification batches shared by the CLI and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .extremum import check_sequential_max_bound, check_sequential_min_bound
from .elliptic import (
    CylinderProblem,
    EllipticProblem,
    solve_cylinder,
    solve_elliptic,
    verify_cylinder_principles,
    verify_elliptic_uniqueness,
    verify_strong_principle,
    verify_weak_principles,
)
from .fode import (
    LinearSFODE,
    MultiTermSFODE,
    SandwichSpec,
    compare_linear,
    sandwich_check,
    sign_check,
    solve_linear_two_point,
)
from .fpde import (
    DiffusionProblem,
    PseudoParabolicProblem,
    continuous_dependence_experiment,
    nonlinear_uniqueness_check,
    solve_diffusion,
    solve_pseudo_parabolic,
    verify_parabolic_max_principle,
    verify_parabolic_min_principle,
    verify_pseudo_principles,
    verify_sign_corollaries,
)
from .fracops import FracLaplacianSpec, Grid1D, SampledFn
from .report import ExtremumReport, VerificationReport
from .rng import Xoshiro256

TRIG_DEGREE = 5


def random_trig_poly(rng: Xoshiro256, grid: Grid1D) -> SampledFn:
    """``sum_k a_k sin(k pi x) + b_k cos(k pi x)``, ``k = 0..5``, coefficients in [-1, 1]."""
    k = np.arange(TRIG_DEGREE + 1)
    a = rng.uniform(-1.0, 1.0, TRIG_DEGREE + 1)
    b = rng.uniform(-1.0, 1.0, TRIG_DEGREE + 1)
    # scale to the unit interval whatever the grid
    x = (grid.nodes - grid.a) / (grid.b - grid.a)
    arg = np.pi * np.outer(x, k)
    return SampledFn(grid, np.sin(arg) @ a + np.cos(arg) @ b, label="trig")


def _interior(f: SampledFn) -> bool:
    n = f.grid.n
    return 0 < int(np.argmin(f.values)) < n and 0 < int(np.argmax(f.values)) < n


def random_orders(rng: Xoshiro256, region: str) -> tuple[float, float]:
    """Uniform draw of ``(alpha, beta)`` from the open unit square restricted to ``region``."""
    if region == "sum_eq_1":
        alpha = rng.uniform(0.05, 0.95)
        return alpha, 1.0 - alpha
    while True:
        alpha, beta = rng.random(), rng.random()
        if alpha == 0.0 or beta == 0.0:
            continue
        s = alpha + beta
        if (region == "sum_gt_1" and s > 1.0) or (region == "sum_lt_1" and s < 1.0):
            return alpha, beta


def extremum_batch(
    seed: int = 42, count: int = 200, n: int = 2048, base_tol: float = 1e-4, eq_tol: float = 5e-3
) -> list[ExtremumReport]:
    """Sequential min and max bounds on random trigonometric polynomials in each order region.

    Polynomials are redrawn until both extrema are interior, since the bounds
    say nothing about end nodes.  Tolerances: ``base_tol * (1 + |f|_inf)`` for
    the one-sided bounds and ``eq_tol * (1 + |f'|_inf)`` for the
    ``alpha + beta = 1`` identity.
    """
    rng = Xoshiro256(seed)
    grid = Grid1D(0.0, 1.0, n)
    reports: list[ExtremumReport] = []
    for region in ("sum_gt_1", "sum_lt_1", "sum_eq_1"):
        for _ in range(count):
            f = random_trig_poly(rng, grid)
            while not _interior(f):
                f = random_trig_poly(rng, grid)
            alpha, beta = random_orders(rng, region)
            if region == "sum_eq_1":
                tol = eq_tol * (1.0 + float(np.max(np.abs(np.gradient(f.values, grid.h)))))
            else:
                tol = base_tol * (1.0 + f.sup_norm())
            reports.append(check_sequential_min_bound(f, alpha, beta, tol))
            reports.append(check_sequential_max_bound(f, alpha, beta, tol))
    return reports


def _sequential_orders(rng: Xoshiro256) -> tuple[float, float]:
    """``alpha, beta`` in (0, 1) with ``1 < alpha + beta <= 2``."""
    while True:
        alpha, beta = rng.random(), rng.random()
        if alpha > 0.0 and beta > 0.0 and alpha + beta > 1.0:
            return alpha, beta


def _cos_bump(rng: Xoshiro256, x: np.ndarray) -> np.ndarray:
    # smooth profile with values in [0, 1]
    omega = rng.uniform(0.0, 2.0 * np.pi)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return 0.5 * (1.0 + np.cos(omega * x + phase))


def random_sign_problem(rng: Xoshiro256, grid: Grid1D) -> LinearSFODE:
    """Random ``q <= 0`` with ``q(a) != 0`` and ``f >= 0``; ``u(a) = f(a) / q(a)``.

    That initial value is the one forced by continuity of the equation at
    ``a``, where the sequential derivative of a smooth function vanishes.
    """
    x = grid.nodes - grid.a
    alpha, beta = _sequential_orders(rng)
    q = -(rng.uniform(0.1, 2.0) + rng.uniform(0.0, 1.0) * _cos_bump(rng, x))
    f = rng.uniform(0.0, 1.0) + rng.uniform(0.0, 1.0) * _cos_bump(rng, x)
    return LinearSFODE(grid, alpha, beta, SampledFn(grid, q, "q"), SampledFn(grid, f, "f"), u_a=float(f[0] / q[0]))


def random_comparison_pair(rng: Xoshiro256, grid: Grid1D) -> tuple[LinearSFODE, LinearSFODE]:
    """Two problems sharing ``q`` and initial data, with ``f2 = f1 + bump``, ``bump >= 0``."""
    x = grid.nodes - grid.a
    alpha, beta = _sequential_orders(rng)
    q = SampledFn(grid, -(rng.uniform(0.1, 2.0) + rng.uniform(0.0, 1.0) * _cos_bump(rng, x)), "q")
    f1 = rng.uniform(-1.0, 1.0) * np.sin(rng.uniform(0.0, 2.0 * np.pi) * x + rng.uniform(0.0, 2.0 * np.pi))
    centre = rng.uniform(0.0, float(x[-1]))
    width = rng.uniform(0.05, 0.5) * float(x[-1])
    f2 = f1 + rng.uniform(0.0, 1.0) * np.exp(-(((x - centre) / width) ** 2))
    u_a = rng.uniform(-1.0, 1.0)
    return (
        LinearSFODE(grid, alpha, beta, q, SampledFn(grid, f1, "f1"), u_a=u_a),
        LinearSFODE(grid, alpha, beta, q, SampledFn(grid, f2, "f2"), u_a=u_a),
    )


def random_sandwich(rng: Xoshiro256, grid: Grid1D) -> tuple[SandwichSpec, MultiTermSFODE]:
    """``F = mu u + g(x) + eps sin(omega u)`` with envelopes ``mu u + g -/+ eps``."""
    x = grid.nodes
    alpha = rng.uniform(0.5, 1.0)
    mu = rng.uniform(-2.0, -0.5)
    eps = rng.uniform(0.05, 0.3)
    omega = rng.uniform(0.5, 3.0)
    g = rng.uniform(-1.0, 1.0) * np.sin(rng.uniform(0.0, 2.0 * np.pi) * (x - grid.a) + rng.uniform(0.0, 2.0 * np.pi))
    u_a = rng.uniform(-0.5, 0.5)

    def F(xs, u):
        return mu * u + np.interp(xs, x, g) + eps * np.sin(omega * u)

    spec = SandwichSpec(mu, mu, SampledFn(grid, g + eps, "q1"), SampledFn(grid, g - eps, "q2"), F)
    return spec, MultiTermSFODE(grid, ((1.0, alpha, alpha),), F, u_a=u_a)


def ode_batch(seed: int = 42, n: int = 1024, signs: int = 50, pairs: int = 50, sandwiches: int = 10) -> dict:
    """Sign, comparison and sandwich reports for random linear and nonlinear problems.

    The two-point reading of the sign theorem is added for each sign problem
    as an informational report.
    """
    rng = Xoshiro256(seed)
    grid = Grid1D(0.0, 1.0, n)
    sign, two_point, comparison, sandwich = [], [], [], []
    for _ in range(signs):
        p = random_sign_problem(rng, grid)
        sign.append(sign_check(p))
        u = solve_linear_two_point(p, min(p.u_a, 0.0))
        r = sign_check(p, u)
        two_point.append(
            VerificationReport(
                "ode_sign_two_point", r.value, r.bound, r.margin, r.tolerance, r.location,
                status="informational", details={"reading": "u(a) and u(b) prescribed"},
            )
        )
    for _ in range(pairs):
        comparison.append(compare_linear(*random_comparison_pair(rng, grid)))
    for _ in range(sandwiches):
        sandwich.append(sandwich_check(*random_sandwich(rng, grid)))
    return {"sign": sign, "sign_two_point": two_point, "comparison": comparison, "sandwich": sandwich}


def _space_profile(rng: Xoshiro256, x: np.ndarray) -> np.ndarray:
    """Random smooth profile on the unit interval with values in [-1, 1]."""
    k = rng.integer(1, 4)
    return 0.5 * rng.uniform(-1.0, 1.0) * np.sin(k * np.pi * x) + 0.5 * rng.uniform(-1.0, 1.0) * np.cos(
        rng.uniform(0.0, 2.0 * np.pi) * x
    )


def _time_profile(rng: Xoshiro256, t: np.ndarray, start: float) -> np.ndarray:
    # starts at ``start`` so corners stay compatible
    return start + rng.uniform(-0.5, 0.5) * np.sin(rng.uniform(0.5, 4.0) * t)


def _nonneg_forcing(rng: Xoshiro256, sign: float):
    c0 = rng.uniform(0.0, 1.0)
    c1 = rng.uniform(0.0, 2.0)
    kx = rng.uniform(0.5, 6.0)
    kt = rng.uniform(0.5, 6.0)

    def F(x, t):
        return sign * (c0 + c1 * np.sin(kx * x) ** 2 * np.cos(kt * t) ** 2)

    return F


def _pde_orders(rng: Xoshiro256) -> tuple[float, float, float, float]:
    alpha = rng.uniform(0.1, 1.0)
    while True:
        b1, b2 = rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.0)
        if b1 + b2 > 1.0:
            break
    return alpha, b1, b2, rng.uniform(0.1, 2.0)


def _nonlinear_orders(rng: Xoshiro256) -> tuple[float, float, float, float]:
    # alpha >= 0.5 keeps the per-level Picard map contractive for the cubic forcing used here
    alpha, b1, b2, nu = _pde_orders(rng)
    return 0.5 + 0.5 * alpha, b1, b2, nu


def _pde_data(rng: Xoshiro256, xg: Grid1D, tg: Grid1D, sign: float | None):
    """Initial and boundary samples; ``sign`` restricts them to one sign when given."""
    x, t = xg.nodes, tg.nodes
    phi = _space_profile(rng, x)
    if sign is not None:
        phi = sign * np.abs(phi)
    left = _time_profile(rng, t, float(phi[0]))
    right = _time_profile(rng, t, float(phi[-1]))
    if sign is not None:
        left = sign * np.abs(left)
        right = sign * np.abs(right)
    return SampledFn(xg, phi, "phi"), SampledFn(tg, left, "psi_a"), SampledFn(tg, right, "psi_b")


def _perturbation(rng: Xoshiro256, xg: Grid1D) -> np.ndarray:
    delta = rng.uniform(0.01, 0.1)
    return delta * np.sin(rng.integer(1, 4) * np.pi * xg.nodes)


def diffusion_batch(seed: int = 42, n_x: int = 128, n_t: int = 128, count: int = 25, pairs: int = 10) -> dict:
    """Min/max principles with their sign corollaries, continuous dependence and nonlinear uniqueness."""
    rng = Xoshiro256(seed)
    xg, tg = Grid1D(0.0, 1.0, n_x), Grid1D(0.0, 1.0, n_t)
    out: dict[str, list] = {"min": [], "max": [], "corollary": [], "dependence": [], "nonlinear": []}
    for kind, sign in (("min", 1.0), ("max", -1.0)):
        for j in range(count):
            alpha, b1, b2, nu = _pde_orders(rng)
            # every third scenario has sign-restricted data so the corollaries are exercised
            phi, pa, pb = _pde_data(rng, xg, tg, sign if j % 3 == 0 else None)
            p = DiffusionProblem(xg, tg, alpha, b1, b2, nu, _nonneg_forcing(rng, sign), phi, pa, pb)
            u = solve_diffusion(p)
            check = verify_parabolic_min_principle if kind == "min" else verify_parabolic_max_principle
            out[kind].append(check(u, p))
            out["corollary"].extend(r for r in verify_sign_corollaries(u, p) if r.counts)
    for _ in range(pairs):
        alpha, b1, b2, nu = _pde_orders(rng)
        phi, pa, pb = _pde_data(rng, xg, tg, None)
        p = DiffusionProblem(xg, tg, alpha, b1, b2, nu, _nonneg_forcing(rng, rng.uniform(-1.0, 1.0)), phi, pa, pb)
        phi_bar = SampledFn(xg, phi.values + _perturbation(rng, xg), "phi_bar")
        out["dependence"].append(continuous_dependence_experiment(p, phi_bar))
    for _ in range(3):
        alpha, b1, b2, nu = _nonlinear_orders(rng)
        phi, pa, pb = _pde_data(rng, xg, tg, None)
        c3, c1 = rng.uniform(0.1, 0.5), rng.uniform(0.0, 1.0)
        g = _nonneg_forcing(rng, rng.uniform(-1.0, 1.0))

        def F(x, t, u, c3=c3, c1=c1, g=g):
            return -c3 * u**3 - c1 * u + g(x, t)

        p = DiffusionProblem(xg, tg, alpha, b1, b2, nu, F, phi, pa, pb, nonlinear=True)
        g2 = SampledFn(xg, phi.values + _perturbation(rng, xg), "g2")
        out["nonlinear"].extend(nonlinear_uniqueness_check(p, g2))
    return out


def pseudo_batch(seed: int = 42, n_x: int = 128, n_t: int = 128, count: int = 15) -> dict:
    """Pseudo-parabolic sign, boundary-extremum, uniqueness and stability reports, plus nonlinear variants."""
    rng = Xoshiro256(seed)
    xg, tg = Grid1D(0.0, 1.0, n_x), Grid1D(0.0, 1.0, n_t)
    reports: list[VerificationReport] = []
    for j in range(count):
        sign = 1.0 if j % 2 == 0 else -1.0
        alpha, b1, b2, nu = _pde_orders(rng)
        phi, pa, pb = _pde_data(rng, xg, tg, sign if j % 3 != 2 else None)
        p = PseudoParabolicProblem(xg, tg, alpha, b1, b2, nu, _nonneg_forcing(rng, sign), phi, pa, pb)
        u = solve_pseudo_parabolic(p)
        phi_bar = SampledFn(xg, phi.values + _perturbation(rng, xg), "phi_bar")
        reports.extend(verify_pseudo_principles(u, p, phi_bar))
    for _ in range(3):
        alpha, b1, b2, nu = _nonlinear_orders(rng)
        phi, pa, pb = _pde_data(rng, xg, tg, None)
        c3, c1 = rng.uniform(0.1, 0.5), rng.uniform(0.0, 1.0)
        g = _nonneg_forcing(rng, rng.uniform(-1.0, 1.0))

        def F(x, t, u, c3=c3, c1=c1, g=g):
            return -c3 * u**3 - c1 * u + g(x, t)

        p = PseudoParabolicProblem(xg, tg, alpha, b1, b2, nu, F, phi, pa, pb, nonlinear=True)
        g2 = SampledFn(xg, phi.values + _perturbation(rng, xg), "g2")
        reports.extend(nonlinear_uniqueness_check(p, g2))
    return {"pseudo": reports}


def _box_field(rng: Xoshiro256, coords: list[np.ndarray], lo: float, hi: float) -> np.ndarray:
    """Smooth random field with values in [lo, hi] on a tensor grid."""
    base = rng.uniform(0.0, 1.0)
    wave = np.ones_like(coords[0])
    for c in coords:
        wave = wave * 0.5 * (1.0 + np.cos(rng.uniform(0.5, 6.0) * c + rng.uniform(0.0, 2.0 * np.pi)))
    mix = 0.5 * (base + wave)
    return lo + (hi - lo) * mix


def random_elliptic(rng: Xoshiro256, dims: int, n: int, principle: str, sign_data: bool) -> EllipticProblem:
    """Random problem satisfying the sign hypotheses of the weak ``"max"`` or ``"min"`` principle."""
    grids = tuple(Grid1D(0.0, rng.uniform(0.5, 2.0), n) for _ in range(dims))
    coords = list(np.meshgrid(*[g.nodes for g in grids], indexing="ij"))
    while True:
        alpha, beta = rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)
        if alpha + beta > 1.0:
            break
    gamma_ord = rng.uniform(0.1, 1.0)
    a = tuple(_box_field(rng, coords, 0.0, 2.0) for _ in range(dims))
    b = tuple(_box_field(rng, coords, -1.0, 1.0) for _ in range(dims))
    c_sign = -1.0 if principle == "max" else 1.0
    c = tuple(c_sign * _box_field(rng, coords, 0.1, 2.0) for _ in range(dims))
    d = -_box_field(rng, coords, 0.0, 2.0)
    F = (1.0 if principle == "max" else -1.0) * _box_field(rng, coords, 0.0, 2.0)
    phi = _box_field(rng, coords, -1.0, 1.0)
    if sign_data:
        # data sign that makes the matching corollary applicable
        phi = np.abs(phi) * (-1.0 if principle == "max" else 1.0)
    return EllipticProblem(grids, alpha, beta, gamma_ord, a=a, b=b, c=c, d=d, F=F, phi=phi)


def random_cylinder(rng: Xoshiro256, n: int, sign: float, sign_data: bool) -> CylinderProblem:
    xg = Grid1D(0.0, rng.uniform(0.5, 2.0), n)
    lo = rng.uniform(-1.0, 0.0)
    yg = Grid1D(lo, lo + rng.uniform(0.5, 2.0), n)
    while True:
        alpha, beta = rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)
        if alpha + beta > 1.0:
            break
    spec = FracLaplacianSpec(rng.uniform(0.1, 0.9))
    X, Y = np.meshgrid(xg.nodes, yg.nodes, indexing="ij")
    f = sign * _box_field(rng, [X, Y], 0.0, 2.0)
    phi1 = _box_field(rng, [yg.nodes], -1.0, 1.0)
    phi2 = _box_field(rng, [yg.nodes], -1.0, 1.0)
    if sign_data:
        phi1, phi2 = sign * np.abs(phi1), sign * np.abs(phi2)
    return CylinderProblem(xg, yg, alpha, beta, spec, f, SampledFn(yg, phi1, "phi1"), SampledFn(yg, phi2, "phi2"))


def elliptic_batch(seed: int = 42, n: int = 64, count: int = 25, cylinders: int = 15) -> dict:
    """Weak principles and corollaries per dimension, strong principle, uniqueness and cylinder checks."""
    rng = Xoshiro256(seed)
    out: dict[str, list] = {"weak": [], "strong": [], "uniqueness": [], "cylinder": []}
    for dims in (1, 2):
        for principle in ("max", "min"):
            for j in range(count):
                p = random_elliptic(rng, dims, n, principle, sign_data=j % 3 == 0)
                u = solve_elliptic(p)
                name = "elliptic_weak_max" if principle == "max" else "elliptic_weak_min"
                for r in verify_weak_principles(u, p):
                    # each scenario is built for one principle; the other direction is off-hypothesis
                    if r.principle == name or r.counts:
                        out["weak"].append(r)
                if j < 2:
                    out["uniqueness"].append(verify_elliptic_uniqueness(p, u))
        for _ in range(3):
            p = random_elliptic(rng, dims, n, "max", sign_data=False)
            hom = EllipticProblem(p.grids, p.alpha, p.beta, p.gamma_ord, a=p.a, b=p.b, c=p.c, d=p.d)
            out["strong"].append(verify_strong_principle(solve_elliptic(hom), hom))
    for j in range(cylinders):
        sign = 1.0 if j % 2 == 0 else -1.0
        p = random_cylinder(rng, n, sign, sign_data=j % 3 != 2)
        out["cylinder"].extend(verify_cylinder_principles(solve_cylinder(p), p))
    return out


def laplace_batch(seed: int = 42, n: int = 64, count: int = 15) -> dict:
    """Cylinder sign, boundary-attainment and uniqueness reports only."""
    rng = Xoshiro256(seed)
    out: dict[str, list] = {"cylinder": []}
    for j in range(count):
        sign = 1.0 if j % 2 == 0 else -1.0
        p = random_cylinder(rng, n, sign, sign_data=j % 3 != 2)
        out["cylinder"].extend(verify_cylinder_principles(solve_cylinder(p), p))
    return out
