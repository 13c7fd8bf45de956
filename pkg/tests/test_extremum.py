import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracmax.batches import extremum_batch, random_orders, random_trig_poly
from fracmax.errors import DomainError
from fracmax.extremum import (
    check_caputo_max_bound,
    check_order12_min_bounds,
    check_rl_max_bound,
    check_sequential_max_bound,
    check_sequential_min_bound,
    locate_extremum,
    non_additivity_witness,
)
from fracmax.fracops import Grid1D, SampledFn
from fracmax.rng import Xoshiro256

TOL = 1e-6


@pytest.fixture(scope="module")
def grid():
    return Grid1D(0.0, 1.0, 2048)


def fn(grid, f, label=""):
    return SampledFn(grid, f(grid.nodes), label)


def G(x):
    return float(mpmath.gamma(x))


class TestLocate:
    def test_quadratic(self, grid):
        assert locate_extremum(fn(grid, lambda x: (x - 0.5) ** 2), "min") == 1024

    def test_ties_take_first_index(self, grid):
        assert locate_extremum(fn(grid, lambda x: 3.0 + 0 * x), "max") == 0

    def test_sin_within_one_cell(self):
        g = Grid1D(0.0, 1.0, 1024)
        idx = locate_extremum(fn(g, lambda x: np.sin(7 * x)), "max")
        assert abs(g.nodes[idx] - math.pi / 14) <= g.h
        assert idx == int(np.argmax([math.sin(7 * t) for t in g.nodes]))

    def test_bad_kind(self, grid):
        with pytest.raises(DomainError):
            locate_extremum(fn(grid, np.sin), "saddle")


class TestSequentialBounds:
    def test_min_above_one(self, grid):
        r = check_sequential_min_bound(fn(grid, lambda x: (x - 0.5) ** 2), 0.75, 0.75, TOL)
        assert r.passed and r.lhs >= r.rhs >= 0 and r.case_tag == "sum_gt_1"
        # oracle: D^a D^b of (x - 1/2)^2 with s = a + b is 2x^(2-s)/G(3-s) - x^(1-s)/G(2-s)
        exact = 2 * 0.5**0.5 / G(1.5) - 0.5 ** (-0.5) / G(0.5)
        assert r.lhs == pytest.approx(exact, abs=1e-3)
        assert r.rhs == pytest.approx(0.5 / G(0.5) * 0.5**-1.5 * 0.25, rel=1e-12)

    def test_min_at_one(self, grid):
        f = fn(grid, lambda x: (x - 0.5) ** 2)
        tol = 5e-3 * (1 + np.max(np.abs(np.gradient(f.values, grid.h))))
        r = check_sequential_min_bound(f, 0.5, 0.5, tol)
        assert r.passed and r.case_tag == "sum_eq_1" and r.rhs == 0.0
        # the exact sequential derivative at total order one is f'(x*) = 0
        assert abs(r.lhs) < 1e-4

    def test_min_below_one(self, grid):
        r = check_sequential_min_bound(fn(grid, lambda x: (x - 0.5) ** 2), 0.3, 0.4, TOL)
        assert r.passed and r.lhs <= r.rhs <= 0

    @pytest.mark.parametrize("check", [check_sequential_min_bound, check_sequential_max_bound])
    def test_constant(self, grid, check):
        r = check(fn(grid, lambda x: 2.0 + 0 * x), 0.7, 0.6, TOL)
        assert r.lhs == 0.0 and r.rhs == 0.0 and r.passed and r.x_star == grid.nodes[1]
        assert "constant" in r.note

    def test_max_above_one(self, grid):
        r = check_sequential_max_bound(fn(grid, lambda x: -((x - 0.5) ** 2)), 0.75, 0.75, TOL)
        assert r.passed and r.lhs <= r.rhs <= 0

    def test_max_below_one(self, grid):
        r = check_sequential_max_bound(fn(grid, lambda x: -((x - 0.5) ** 2)), 0.3, 0.4, TOL)
        assert r.passed and r.lhs >= r.rhs >= 0

    def test_mirror(self, grid):
        f = fn(grid, lambda x: np.cos(5 * x) + x)
        lo = check_sequential_min_bound(f, 0.8, 0.5, TOL)
        hi = check_sequential_max_bound(f * -1.0, 0.8, 0.5, TOL)
        assert hi.lhs == -lo.lhs and hi.rhs == -lo.rhs and hi.margin == lo.margin

    def test_explicit_node_a_rejected(self, grid):
        with pytest.raises(DomainError):
            check_sequential_min_bound(fn(grid, lambda x: (x - 0.5) ** 2), 0.75, 0.75, TOL, index=0)

    def test_end_node_extremum_not_applicable(self, grid):
        r = check_sequential_min_bound(fn(grid, lambda x: x), 0.7, 0.6, TOL)
        assert not r.applicable and r.passed and math.isnan(r.margin)

    @pytest.mark.parametrize("alpha, beta", [(1.0, 0.5), (0.5, 0.0)])
    def test_order_range(self, grid, alpha, beta):
        with pytest.raises(DomainError):
            check_sequential_min_bound(fn(grid, np.sin), alpha, beta, TOL)

    def test_pass_iff_margin(self, grid):
        r = check_sequential_min_bound(fn(grid, lambda x: (x - 0.5) ** 2), 0.75, 0.75, 1e3)
        assert r.passed == (r.margin >= -r.tolerance)
        d = r.to_dict()
        assert d["pass"] is True and d["case_tag"] == "sum_gt_1"

    @given(st.integers(0, 2**32), st.sampled_from(["sum_gt_1", "sum_lt_1"]))
    def test_random_polynomials(self, seed, region):
        g = Grid1D(0.0, 1.0, 1024)
        rng = Xoshiro256(seed)
        f = random_trig_poly(rng, g)
        alpha, beta = random_orders(rng, region)
        tol = 1e-4 * (1 + f.sup_norm())
        for r in (check_sequential_min_bound(f, alpha, beta, tol), check_sequential_max_bound(f, alpha, beta, tol)):
            assert r.passed


class TestSingleOrderBounds:
    def test_caputo_max(self, grid):
        r = check_caputo_max_bound(fn(grid, lambda x: -((x - 0.5) ** 2)), 0.5, TOL)
        assert r.passed and r.lhs >= r.rhs >= 0
        # D^1/2 of -(t - 1/2)^2 at 1/2
        exact = -2 * 0.5**1.5 / G(2.5) + 0.5**0.5 / G(1.5)
        assert r.lhs == pytest.approx(exact, abs=1e-3)

    def test_caputo_max_sin(self, grid):
        r = check_caputo_max_bound(fn(grid, lambda x: np.sin(np.pi * x)), 0.25, TOL)
        assert r.passed and r.margin > 0

    def test_caputo_max_constant(self, grid):
        r = check_caputo_max_bound(fn(grid, lambda x: 1.0 + 0 * x), 0.4, TOL)
        assert r.lhs == 0.0 and r.rhs == 0.0

    def test_rl_max(self, grid):
        r = check_rl_max_bound(fn(grid, lambda x: -((x - 0.5) ** 2)), 0.5, TOL)
        assert r.passed and r.lhs >= r.rhs
        r = check_rl_max_bound(fn(grid, lambda x: np.sin(np.pi * x)), 0.25, TOL)
        assert r.passed and r.lhs >= 0

    def test_rl_max_constant(self, grid):
        r = check_rl_max_bound(fn(grid, lambda x: 2.0 + 0 * x), 0.4, TOL)
        assert r.passed and r.lhs == pytest.approx(r.rhs, rel=1e-12)

    def test_single_order_range(self, grid):
        with pytest.raises(DomainError):
            check_caputo_max_bound(fn(grid, np.sin), 1.0, TOL)

    def test_order12(self, grid):
        reps = check_order12_min_bounds(fn(grid, lambda x: (x - 0.5) ** 2), 1.5, TOL)
        assert [r.check for r in reps] == ["caputo_order12_min", "rl_order12_min"]
        assert all(r.passed for r in reps)

    def test_order12_zero(self, grid):
        for r in check_order12_min_bounds(fn(grid, lambda x: 0 * x), 1.5, TOL):
            assert r.lhs == 0.0 and r.rhs == 0.0 and r.passed

    def test_order12_positive_minimum(self, grid):
        rl = check_order12_min_bounds(fn(grid, lambda x: (x - 0.4) ** 2 + 0.1), 1.2, TOL)[1]
        assert rl.passed and rl.lhs >= 0

    def test_order12_range(self, grid):
        with pytest.raises(DomainError):
            check_order12_min_bounds(fn(grid, np.sin), 0.5, TOL)


class TestWitness:
    def test_gap_matches_closed_form(self, grid):
        # for smooth f the gap is f'(a) t^(1-s) / G(2-s), s = alpha + beta
        w = non_additivity_witness(fn(grid, np.sin, "sin(t)"), 0.6, 0.6)
        assert w["gap_sup"] > 0.1
        assert w["sequential_at_b"] - w["single_order_at_b"] == pytest.approx(1 / G(0.8), abs=5e-3)

    def test_requires_total_between_one_and_two(self, grid):
        with pytest.raises(DomainError):
            non_additivity_witness(fn(grid, np.sin), 0.3, 0.4)


def test_batch_is_deterministic():
    a = [r.to_dict() for r in extremum_batch(seed=7, count=2, n=2048)]
    b = [r.to_dict() for r in extremum_batch(seed=7, count=2, n=2048)]
    assert a == b and len(a) == 12
    assert all(r["pass"] for r in a)
