"""Extremum-point inequalities for fractional derivatives of sampled functions.

Every check locates the extremum on the grid, evaluates the discrete
operator there, and compares it with the closed-form bound.  Bounds are only
claimed at interior extrema.  When the located extremum sits on an end node
the report is marked not applicable.  The exception is a constant function,
which is taken at the first interior node so that both sides vanish.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .fracops import (
    SampledFn,
    _case_tag,
    caputo,
    caputo_order12,
    one_sided_slope,
    rl_derivative,
    rl_order12,
    sequential_caputo,
)
from .report import ExtremumReport
from .specfun import gamma

__all__ = [
    "locate_extremum",
    "check_sequential_min_bound",
    "check_sequential_max_bound",
    "check_caputo_max_bound",
    "check_rl_max_bound",
    "check_order12_min_bounds",
    "non_additivity_witness",
]


def locate_extremum(f: SampledFn, kind: str) -> int:
    """Index of the first node attaining the global min or max."""
    if kind == "min":
        return int(np.argmin(f.values))
    if kind == "max":
        return int(np.argmax(f.values))
    raise DomainError(f"kind must be 'min' or 'max', got {kind!r}")


def _pick_node(f: SampledFn, kind: str, index: int | None) -> tuple[int, str]:
    if index is not None:
        if index == 0:
            raise DomainError("extremum bound is singular at x* = a; choose an interior node")
        return index, ""
    v = f.values
    if v.max() == v.min():
        return 1, "constant function: first interior node by convention"
    return locate_extremum(f, kind), ""


def _not_applicable(f: SampledFn, kind: str, idx: int, tag: str, tol: float, check: str) -> ExtremumReport:
    where = "a" if idx == 0 else "b"
    return ExtremumReport(
        kind=kind,
        x_star=float(f.nodes[idx]),
        f_at_a=float(f.values[0]),
        f_at_xstar=float(f.values[idx]),
        lhs=math.nan,
        rhs=math.nan,
        margin=math.nan,
        case_tag=tag,
        tolerance=tol,
        applicable=False,
        check=check,
        note=f"extremum on end node {where}: outside the interior hypotheses",
    )


def _check_unit_orders(alpha: float, beta: float) -> None:
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise DomainError(f"sequential bounds need 0 < alpha, beta < 1, got {alpha}, {beta}")


def _sequential_bound(f: SampledFn, alpha: float, beta: float, tol: float, kind: str, index: int | None) -> ExtremumReport:
    _check_unit_orders(alpha, beta)
    check = f"sequential_{kind}"
    total = alpha + beta
    tag = _case_tag(total)
    idx, note = _pick_node(f, kind, index)
    n = f.grid.n
    if not 0 < idx < n and not note and index is None:
        return _not_applicable(f, kind, idx, tag, tol, check)
    xs = float(f.nodes[idx])
    fa = float(f.values[0])
    fx = float(f.values[idx])
    lhs = float(sequential_caputo(f, alpha, beta).values[idx])
    if tag == "sum_eq_1":
        rhs = 0.0
        margin = -abs(lhs)
    else:
        rhs = (total - 1.0) / gamma(2.0 - total) * (xs - f.grid.a) ** (-total) * (fa - fx)
        # minimum: lhs >= rhs >= 0 above one, lhs <= rhs <= 0 below; maximum mirrors both
        upward = (tag == "sum_gt_1") == (kind == "min")
        margin = min(lhs - rhs, rhs) if upward else min(rhs - lhs, -rhs)
    return ExtremumReport(kind, xs, fa, fx, lhs, rhs, margin, tag, tol, True, check, note)


def check_sequential_min_bound(
    f: SampledFn, alpha: float, beta: float, tol: float, index: int | None = None
) -> ExtremumReport:
    """Sequential Caputo derivative at the minimum against its closed-form bound.

    Above ``alpha + beta = 1`` the derivative is at least the bound, which is
    non-negative.  Below it, the derivative is at most the bound, which is
    non-positive.  At exactly one it vanishes.
    """
    return _sequential_bound(f, alpha, beta, tol, "min", index)


def check_sequential_max_bound(
    f: SampledFn, alpha: float, beta: float, tol: float, index: int | None = None
) -> ExtremumReport:
    """Mirror image of :func:`check_sequential_min_bound` at the maximum."""
    return _sequential_bound(f, alpha, beta, tol, "max", index)


def check_caputo_max_bound(f: SampledFn, alpha: float, tol: float, index: int | None = None) -> ExtremumReport:
    """``D^alpha f(t0) >= (t0-a)^(-alpha) / Gamma(1-alpha) * (f(t0) - f(a)) >= 0`` at the maximum."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} must lie in (0, 1)")
    idx, note = _pick_node(f, "max", index)
    if not 0 < idx < f.grid.n and not note and index is None:
        return _not_applicable(f, "max", idx, "single_order", tol, "caputo_max")
    t0 = float(f.nodes[idx] - f.grid.a)
    fa, ft = float(f.values[0]), float(f.values[idx])
    lhs = float(caputo(f, alpha).values[idx])
    rhs = t0 ** (-alpha) / gamma(1.0 - alpha) * (ft - fa)
    margin = min(lhs - rhs, rhs)
    return ExtremumReport("max", float(f.nodes[idx]), fa, ft, lhs, rhs, margin, "single_order", tol, True, "caputo_max", note)


def check_rl_max_bound(f: SampledFn, alpha: float, tol: float, index: int | None = None) -> ExtremumReport:
    """``D_RL^alpha f(t0) >= (t0-a)^(-alpha) / Gamma(1-alpha) * f(t0)`` at the maximum.

    When ``f(t0) >= 0`` the derivative itself must also be non-negative, and
    that is folded into the margin.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} must lie in (0, 1)")
    idx, note = _pick_node(f, "max", index)
    if not 0 < idx < f.grid.n and not note and index is None:
        return _not_applicable(f, "max", idx, "single_order", tol, "rl_max")
    t0 = float(f.nodes[idx] - f.grid.a)
    fa, ft = float(f.values[0]), float(f.values[idx])
    lhs = float(rl_derivative(f, alpha).values[idx])
    rhs = t0 ** (-alpha) / gamma(1.0 - alpha) * ft
    margin = lhs - rhs
    if ft >= 0:
        margin = min(margin, lhs)
    return ExtremumReport("max", float(f.nodes[idx]), fa, ft, lhs, rhs, margin, "single_order", tol, True, "rl_max", note)


def check_order12_min_bounds(
    f: SampledFn, alpha: float, tol: float, index: int | None = None
) -> list[ExtremumReport]:
    """Bounds at the minimum for derivatives of order ``1 < alpha < 2``.

    Returns two reports, Caputo first and then Riemann-Liouville.  Caputo:
    ``D^alpha f(t0) >= t0^-alpha / Gamma(2-alpha) * [(alpha-1)(f(0)-f(t0)) - t0 f'(0)]``,
    and also ``D^alpha f(t0) >= 0`` when ``f'(0) <= 0``.  Riemann-Liouville:
    ``D^alpha f(t0) >= t0^-alpha / Gamma(2-alpha) * (alpha-1) f(t0)``, and
    also ``>= 0`` when ``f(t0) >= 0``.
    """
    if not 1.0 < alpha < 2.0:
        raise DomainError(f"alpha={alpha} must lie in (1, 2)")
    idx, note = _pick_node(f, "min", index)
    if not 0 < idx < f.grid.n and not note and index is None:
        return [
            _not_applicable(f, "min", idx, "single_order", tol, "caputo_order12_min"),
            _not_applicable(f, "min", idx, "single_order", tol, "rl_order12_min"),
        ]
    t0 = float(f.nodes[idx] - f.grid.a)
    fa, ft = float(f.values[0]), float(f.values[idx])
    dfa = one_sided_slope(f)
    scale = t0 ** (-alpha) / gamma(2.0 - alpha)

    lhs_c = float(caputo_order12(f, alpha).values[idx])
    rhs_c = scale * ((alpha - 1.0) * (fa - ft) - t0 * dfa)
    margin_c = lhs_c - rhs_c
    if dfa <= 0:
        margin_c = min(margin_c, lhs_c)

    lhs_r = float(rl_order12(f, alpha).values[idx])
    rhs_r = scale * (alpha - 1.0) * ft
    margin_r = lhs_r - rhs_r
    if ft >= 0:
        margin_r = min(margin_r, lhs_r)

    xs = float(f.nodes[idx])
    return [
        ExtremumReport("min", xs, fa, ft, lhs_c, rhs_c, margin_c, "single_order", tol, True, "caputo_order12_min", note),
        ExtremumReport("min", xs, fa, ft, lhs_r, rhs_r, margin_r, "single_order", tol, True, "rl_order12_min", note),
    ]


def non_additivity_witness(f: SampledFn, alpha: float, beta: float) -> dict:
    """Sup-norm gap between the sequential derivative and the single Caputo derivative of order ``alpha + beta``.

    Only meaningful for ``1 < alpha + beta < 2``.  Node ``a`` is excluded
    because both operators are pinned to zero there.
    """
    total = alpha + beta
    if not 1.0 < total < 2.0:
        raise DomainError("non-additivity witness needs 1 < alpha + beta < 2")
    seq = sequential_caputo(f, alpha, beta).values
    single = caputo_order12(f, total).values
    gap = np.abs(seq[1:] - single[1:])
    k = int(np.argmax(gap)) + 1
    return {
        "function": f.label,
        "alpha": alpha,
        "beta": beta,
        "n": f.grid.n,
        "gap_sup": float(gap.max()),
        "at_x": float(f.nodes[k]),
        "sequential_at_b": float(seq[-1]),
        "single_order_at_b": float(single[-1]),
    }
