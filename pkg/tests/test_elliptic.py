import numpy as np
import pytest

from fracmax.batches import elliptic_batch, laplace_batch
from fracmax.elliptic import (
    CylinderProblem,
    EllipticProblem,
    solve_cylinder,
    solve_elliptic,
    verify_cylinder_principles,
    verify_elliptic_uniqueness,
    verify_strong_principle,
    verify_weak_principles,
)
from fracmax.errors import DomainError, UsageError
from fracmax.fracops import FracLaplacianSpec, Grid1D, SampledFn, regional_frac_laplacian, sequential_matrix


def unit(n):
    return Grid1D(0.0, 1.0, n)


def cylinder(f, n=32, phi1=0.0, phi2=0.0, alpha=0.8, beta=0.7, delta=0.5):
    xg, yg = unit(n), Grid1D(-1.0, 1.0, n)
    return CylinderProblem(
        xg, yg, alpha, beta, FracLaplacianSpec(delta), f,
        SampledFn(yg, np.full(n + 1, float(phi1))), SampledFn(yg, np.full(n + 1, float(phi2))),
    )


class TestValidation:
    def test_dims(self):
        with pytest.raises(DomainError):
            EllipticProblem((unit(4),) * 3, 0.7, 0.6, 0.5)

    @pytest.mark.parametrize("alpha, beta, g", [(0.3, 0.4, 0.5), (0.7, 0.6, 0.0), (1.2, 0.6, 0.5)])
    def test_orders(self, alpha, beta, g):
        with pytest.raises(DomainError):
            EllipticProblem((unit(8),), alpha, beta, g)

    def test_field_shape(self):
        with pytest.raises((UsageError, DomainError)):
            EllipticProblem((unit(8),), 0.7, 0.6, 0.5, F=np.zeros(5))

    def test_hypotheses(self):
        p = EllipticProblem((unit(8),), 0.7, 0.6, 0.5, a=1.0, c=-1.0, d=-1.0, F=1.0)
        assert p.hypotheses("max") == []
        assert set(p.hypotheses("min")) == {"c_j > 0", "F <= 0"}

    def test_cylinder_phi_grid(self):
        with pytest.raises(UsageError):
            CylinderProblem(unit(8), unit(8), 0.7, 0.6, FracLaplacianSpec(0.5), 0.0, SampledFn(unit(4), np.zeros(5)), SampledFn(unit(8), np.zeros(9)))


class TestElliptic:
    @pytest.mark.parametrize("dims", [1, 2])
    def test_zero(self, dims):
        p = EllipticProblem((unit(16),) * dims, 0.7, 0.6, 0.5, a=1.0, c=-1.0, d=-1.0)
        assert np.max(np.abs(solve_elliptic(p).values)) <= 1e-10

    def test_classical_poisson_1d(self):
        g = unit(64)
        p = EllipticProblem((g,), 0.7, 0.6, 0.5, a=1e-12, c=-1e-12, F=1.0)
        # central differences are exact for quadratics
        exact = 0.5 * g.nodes * (g.nodes - 1.0)
        assert np.max(np.abs(solve_elliptic(p).values - exact)) <= 1e-6

    def test_classical_poisson_2d(self):
        errs = []
        for n in (16, 32, 64):
            g = unit(n)
            X, Y = np.meshgrid(g.nodes, g.nodes, indexing="ij")
            exact = np.sin(np.pi * X) * np.sin(2 * np.pi * Y)
            p = EllipticProblem((g, g), 0.7, 0.6, 0.5, a=1e-12, c=-1e-12, F=-5 * np.pi**2 * exact)
            errs.append(np.max(np.abs(solve_elliptic(p).values - exact)))
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(rates - 2.0) < 0.2) and errs[-1] < 1e-3

    def test_residual(self):
        g = unit(64)
        x = g.nodes
        p = EllipticProblem((g,), 0.8, 0.6, 0.4, a=1.0 + x, b=0.5, c=-1.0, d=-2.0, F=np.cos(3 * x), phi=0.3 + x)
        u = solve_elliptic(p).values
        assert u[0] == 0.3 and u[-1] == 1.3
        h = g.h
        lap = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
        seq = sequential_matrix(g.n, h, 0.8, 0.6, shifted=True) @ u
        drift = (u[2:] - u[:-2]) / (2 * h)
        from fracmax.fracops import caputo

        cap = caputo(SampledFn(g, u), 0.4).values[1:-1]
        res = lap + (1 + x[1:-1]) * seq + 0.5 * drift - cap - 2 * u[1:-1] - np.cos(3 * x[1:-1])
        assert np.max(np.abs(res)) < 1e-8

    def test_weak_max_example(self):
        p = EllipticProblem((unit(64),), 0.7, 0.6, 0.5, a=1.0, c=-1.0, d=-1.0, F=1.0)
        u = solve_elliptic(p)
        assert u.values.max() <= 1e-8
        reps = {r.principle: r for r in verify_weak_principles(u, p)}
        assert reps["elliptic_weak_max"].status == "checked" and reps["elliptic_weak_max"].passed
        assert reps["elliptic_nonpositive"].status == "checked" and reps["elliptic_nonpositive"].passed
        assert reps["elliptic_weak_min"].status == "informational"

    def test_weak_min_2d(self):
        g = unit(24)
        p = EllipticProblem((g, g), 0.7, 0.6, 0.5, a=1.0, c=1.0, d=-1.0, F=-1.0, phi=0.5)
        reps = {r.principle: r for r in verify_weak_principles(solve_elliptic(p), p)}
        for name in ("elliptic_weak_min", "elliptic_nonnegative"):
            assert reps[name].status == "checked" and reps[name].passed

    def test_strong_and_uniqueness(self):
        g = unit(24)
        p = EllipticProblem((g, g), 0.9, 0.5, 0.3, a=2.0, b=(1.0, -1.0), c=-0.5, d=-1.0)
        u = solve_elliptic(p)
        r = verify_strong_principle(u, p)
        assert r.status == "checked" and r.passed
        uq = verify_elliptic_uniqueness(p, u)
        assert uq.value == 0.0 and np.isfinite(uq.details["condition_estimate"])

    def test_strong_off_hypothesis(self):
        p = EllipticProblem((unit(16),), 0.7, 0.6, 0.5, F=1.0)
        assert verify_strong_principle(solve_elliptic(p), p).status == "informational"


class TestCylinder:
    def test_zero(self):
        assert np.array_equal(solve_cylinder(cylinder(0.0)).values, np.zeros((33, 33)))

    def test_positive_source(self):
        p = cylinder(1.0)
        u = solve_cylinder(p)
        assert u.values.min() >= -1e-8 and u.values.max() > 0
        reps = {r.principle: r for r in verify_cylinder_principles(u, p)}
        assert reps["cylinder_nonnegative"].status == "checked" and reps["cylinder_nonnegative"].passed
        assert reps["cylinder_min_on_boundary"].passed

    def test_negative_source(self):
        p = cylinder(-1.0)
        u = solve_cylinder(p)
        assert u.values.max() <= 1e-8
        assert not any(r.failed for r in verify_cylinder_principles(u, p))

    def test_residual_against_function_forms(self):
        n = 32
        p = cylinder(1.0, n=n, phi1=0.0, phi2=0.0, delta=0.3)
        xg, yg = p.xgrid, p.ygrid
        X, Y = np.meshgrid(xg.nodes, yg.nodes, indexing="ij")
        f = np.cos(2 * X) * (1 - Y**2)
        p = CylinderProblem(xg, yg, 0.8, 0.7, FracLaplacianSpec(0.3), f, SampledFn(yg, 1 - yg.nodes**2), SampledFn(yg, np.zeros(n + 1)))
        u = solve_cylinder(p).values
        S = sequential_matrix(n, xg.h, 0.8, 0.7, shifted=True)
        dx = np.column_stack([S @ u[:, j] for j in range(n + 1)])
        ly = np.array([regional_frac_laplacian(SampledFn(yg, u[i]), p.lap_spec).values for i in range(1, n)])
        res = -dx[:, 1:-1] + ly[:, 1:-1] - f[1:-1, 1:-1]
        assert np.max(np.abs(res)) < 1e-8

    def test_deterministic(self):
        p = cylinder(1.0)
        assert solve_cylinder(p).values.tobytes() == solve_cylinder(p).values.tobytes()


def _flat(d):
    return [r.to_dict() for k in sorted(d) for r in d[k]]


def test_batches_deterministic():
    a = elliptic_batch(seed=9, n=12, count=2, cylinders=2)
    assert _flat(a) == _flat(elliptic_batch(seed=9, n=12, count=2, cylinders=2))
    assert _flat(laplace_batch(seed=9, n=12, count=2)) == _flat(laplace_batch(seed=9, n=12, count=2))
