"""``fracmax`` command line: scenario runs, batch verification and plot-data export.

Exit codes: 0 when no applicable check failed, 1 when any check failed or a
solver error stopped the run, 2 for usage and validation errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import batches, plotting
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
from .errors import DomainError, FracmaxError, UsageError, ValidationError
from .extremum import (
    check_caputo_max_bound,
    check_order12_min_bounds,
    check_rl_max_bound,
    check_sequential_max_bound,
    check_sequential_min_bound,
    non_additivity_witness,
)
from .fode import LinearSFODE, sign_check, solve_linear
from .fpde import (
    DiffusionProblem,
    PseudoParabolicProblem,
    nonlinear_uniqueness_check,
    solve_diffusion,
    solve_pseudo_parabolic,
    verify_parabolic_max_principle,
    verify_parabolic_min_principle,
    verify_pseudo_principles,
    verify_sign_corollaries,
)
from .fracops import (
    FracLaplacianSpec,
    Grid1D,
    SampledFn,
    caputo,
    caputo_order12,
    regional_frac_laplacian,
    rl_derivative,
    rl_integral,
    rl_order12,
    sequential_caputo,
)
from .io import (
    atomic_write_text,
    emit_plot_data,
    load_field_binary,
    read_sampled_csv,
    write_field_binary,
    write_field_csv,
    write_sampled_csv,
)
from .report import summarize
from .scenario import SCHEMAS, Scenario, parse_scenario, parse_scenario_text

SUBCOMMAND_KINDS = {
    "op": ("op",),
    "verify": ("extremum", "ode", "diffusion", "pseudo", "elliptic", "laplace"),
    "solve-ode": ("ode",),
    "solve-diffusion": ("diffusion",),
    "solve-pseudo": ("pseudo",),
    "solve-elliptic": ("elliptic",),
    "solve-laplace": ("laplace",),
}


@dataclass
class RunSummary:
    scenario_id: str
    wall_time: float
    reports: list = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)
    groups: dict[str, dict] = field(default_factory=dict)
    error: str = ""
    exit_code: int = 0


class _Run:
    """Collects reports and artifact paths for one scenario run."""

    def __init__(self, scenario: Scenario, out_dir: Path, tol_scale: float):
        self.s = scenario
        self.out = out_dir
        self.tol_scale = tol_scale
        self.groups: dict[str, list] = {}
        self.artifacts: list[str] = []

    @property
    def p(self) -> dict:
        return self.s.parameters

    def path(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.out / name

    def add(self, group: str, reports) -> None:
        if self.tol_scale != 1.0:
            reports = [replace(r, tolerance=r.tolerance * self.tol_scale) for r in reports]
        self.groups.setdefault(group, []).extend(reports)

    def add_groups(self, groups: dict[str, list]) -> None:
        for name, reports in groups.items():
            self.add(name, reports)

    def all_reports(self) -> list:
        return [r for reports in self.groups.values() for r in reports]


def _expr_x(run: _Run, key: str, x: np.ndarray) -> np.ndarray:
    return run.s.expr(key)(x)


def _grid(run: _Run, n_key: str = "n") -> Grid1D:
    return Grid1D(run.p["a"], run.p["b"], run.p[n_key])


def _field_outputs(run: _Run, field, orders: dict, labels: tuple[str, str]) -> None:
    write_field_csv(field, run.path("solution.csv"))
    write_field_binary(field, run.path("solution.bin"))
    dat = run.path("solution.dat")
    run.artifacts.append("solution.dat.json")
    emit_plot_data(field, dat, {"orders": orders})
    values = np.asarray(field.values)
    if values.ndim == 2:
        if hasattr(field, "tgrid"):
            extent = (field.xgrid.a, field.xgrid.b, field.tgrid.a, field.tgrid.b)
            plotting.plot_field(values, extent, run.path("solution.png"), labels, run.s.name)
        else:
            gx, gy = field.grids
            plotting.plot_field(values.T, (gx.a, gx.b, gy.a, gy.b), run.path("solution.png"), labels, run.s.name)
    else:
        plotting.plot_curves(field.grids[0].nodes, {"u": values}, run.path("solution.png"), title=run.s.name)


# ----------------------------------------------------------------- per kind


def _run_op(run: _Run) -> None:
    p = run.p
    if p["input"]:
        src = Path(p["input"])
        if not src.is_absolute() and run.s.source:
            src = Path(run.s.source).parent / src
        f = read_sampled_csv(src)
    else:
        g = _grid(run)
        f = SampledFn(g, run.s.expr("function")(g.nodes), p["function"])
    op = p["operation"]
    if op == "caputo":
        out = caputo(f, p["alpha"])
    elif op == "rl_integral":
        out = rl_integral(f, p["alpha"])
    elif op == "rl_derivative":
        out = rl_derivative(f, p["alpha"])
    elif op == "sequential_caputo":
        out = sequential_caputo(f, p["alpha"], p["beta"])
    elif op == "caputo_order12":
        out = caputo_order12(f, p["alpha"])
    elif op == "rl_order12":
        out = rl_order12(f, p["alpha"])
    else:
        out = regional_frac_laplacian(f, FracLaplacianSpec(p["delta"]))
    write_sampled_csv(f, run.path("input.csv"))
    write_sampled_csv(out, run.path("output.csv"))
    plotting.plot_curves(f.nodes, {"f": f.values, op: out.values}, run.path("output.png"), "t", op)


_SINGLE_CHECKS: dict[str, Callable] = {
    "sequential_min": lambda f, p, tol: [check_sequential_min_bound(f, p["alpha"], p["beta"], tol)],
    "sequential_max": lambda f, p, tol: [check_sequential_max_bound(f, p["alpha"], p["beta"], tol)],
    "caputo_max": lambda f, p, tol: [check_caputo_max_bound(f, p["alpha"], tol)],
    "rl_max": lambda f, p, tol: [check_rl_max_bound(f, p["alpha"], tol)],
    "order12_min": lambda f, p, tol: check_order12_min_bounds(f, p["alpha"], tol),
}


def _run_extremum(run: _Run) -> None:
    p = run.p
    if p["mode"] == "batch":
        run.add("extremum", batches.extremum_batch(run.s.seed, p["count"], p["n"], p["base_tol"], p["eq_tol"]))
        plotting.plot_margins(run.all_reports(), run.path("margins.png"), "extremum bounds")
        return
    g = _grid(run)
    f = SampledFn(g, run.s.expr("function")(g.nodes), p["function"])
    if p["mode"] == "witness":
        w = non_additivity_witness(f, p["alpha"], p["beta"])
        atomic_write_text(run.path("witness.json"), json.dumps(w, sort_keys=True, indent=2) + "\n")
        return
    tol = p["base_tol"] * (1.0 + f.sup_norm())
    run.add("extremum", _SINGLE_CHECKS[p["check"]](f, p, tol))
    plotting.plot_curves(f.nodes, {"f": f.values}, run.path("function.png"), "t", p["function"])


def _run_ode(run: _Run, batch: bool) -> None:
    p = run.p
    if batch:
        run.add_groups(batches.ode_batch(run.s.seed, p["n"], p["signs"], p["pairs"], p["sandwiches"]))
        plotting.plot_margins(run.all_reports(), run.path("margins.png"), "ODE checks")
        return
    g = _grid(run)
    prob = LinearSFODE(
        g, p["alpha"], p["beta"],
        SampledFn(g, _expr_x(run, "q", g.nodes), "q"), SampledFn(g, _expr_x(run, "f", g.nodes), "f"),
        p["u_a"], p["v_a"],
    )
    u = solve_linear(prob)
    run.add("sign", [sign_check(prob, u)])
    write_sampled_csv(u, run.path("solution.csv"))
    plotting.plot_curves(g.nodes, {"u": u.values}, run.path("solution.png"), title=run.s.name)


def _bump(xg: Grid1D) -> np.ndarray:
    return 0.05 * np.sin(np.pi * (xg.nodes - xg.a) / (xg.b - xg.a))


def _parabolic(run: _Run, pseudo: bool):
    p = run.p
    xg, tg = Grid1D(p["a"], p["b"], p["n_x"]), Grid1D(0.0, p["T"], p["n_t"])
    Fe = run.s.expr("F")
    if p["nonlinear"]:
        F = lambda x, t, u: Fe(x, t, u)  # noqa: E731
    else:
        F = lambda x, t: Fe(x, t, 0.0)  # noqa: E731
    phi = SampledFn(xg, _expr_x(run, "phi", xg.nodes), "phi")
    if pseudo:
        b1 = SampledFn(tg, run.s.expr("psi1")(tg.nodes), "psi1")
        b2 = SampledFn(tg, run.s.expr("psi2")(tg.nodes), "psi2")
        cls = PseudoParabolicProblem
    else:
        b1 = SampledFn(tg, run.s.expr("psi_a")(tg.nodes), "psi_a")
        b2 = SampledFn(tg, run.s.expr("psi_b")(tg.nodes), "psi_b")
        cls = DiffusionProblem
    return cls(xg, tg, p["alpha"], p["beta1"], p["beta2"], p["nu"], F, phi, b1, b2, nonlinear=p["nonlinear"])


def _orders(run: _Run, *keys: str) -> dict:
    return {k: run.p[k] for k in keys}


def _run_diffusion(run: _Run, batch: bool) -> None:
    p = run.p
    if batch:
        run.add_groups(batches.diffusion_batch(run.s.seed, p["n_x"], p["n_t"], p["count"], p["pairs"]))
        plotting.plot_margins(run.all_reports(), run.path("margins.png"), "diffusion checks")
        return
    prob = _parabolic(run, pseudo=False)
    u = solve_diffusion(prob)
    run.add("min", [verify_parabolic_min_principle(u, prob)])
    run.add("max", [verify_parabolic_max_principle(u, prob)])
    run.add("corollary", verify_sign_corollaries(u, prob))
    if prob.nonlinear:
        g2 = SampledFn(prob.xgrid, prob.phi.values + _bump(prob.xgrid), "g2")
        run.add("nonlinear", nonlinear_uniqueness_check(prob, g2))
    _field_outputs(run, u, _orders(run, "alpha", "beta1", "beta2", "nu"), ("x", "t"))


def _run_pseudo(run: _Run, batch: bool) -> None:
    p = run.p
    if batch:
        run.add_groups(batches.pseudo_batch(run.s.seed, p["n_x"], p["n_t"], p["count"]))
        plotting.plot_margins(run.all_reports(), run.path("margins.png"), "pseudo-parabolic checks")
        return
    prob = _parabolic(run, pseudo=True)
    u = solve_pseudo_parabolic(prob)
    phi_bar = SampledFn(prob.xgrid, prob.phi.values + _bump(prob.xgrid), "phi_bar")
    run.add("pseudo", verify_pseudo_principles(u, prob, phi_bar))
    if prob.nonlinear:
        run.add("nonlinear", nonlinear_uniqueness_check(prob, phi_bar))
    _field_outputs(run, u, _orders(run, "alpha", "beta1", "beta2", "nu"), ("x", "t"))


def _run_elliptic(run: _Run, batch: bool) -> None:
    p = run.p
    if batch:
        run.add_groups(batches.elliptic_batch(run.s.seed, p["n"], p["count"], p["cylinders"]))
        plotting.plot_margins(run.all_reports(), run.path("margins.png"), "elliptic checks")
        return
    grids = (Grid1D(p["x_lo"], p["x_hi"], p["n"]), Grid1D(p["y_lo"], p["y_hi"], p["n"]))[: p["dims"]]
    mesh = np.meshgrid(*[g.nodes for g in grids], indexing="ij")
    X = mesh[0]
    Y = mesh[1] if p["dims"] == 2 else np.zeros_like(X)
    ev = {k: run.s.expr(k)(X, Y) for k in ("coef_a", "coef_b", "coef_c", "coef_d", "F", "phi")}
    prob = EllipticProblem(
        grids, p["alpha"], p["beta"], p["gamma"],
        a=ev["coef_a"], b=ev["coef_b"], c=ev["coef_c"], d=ev["coef_d"], F=ev["F"], phi=ev["phi"],
    )
    u = solve_elliptic(prob)
    run.add("weak", verify_weak_principles(u, prob))
    run.add("strong", [verify_strong_principle(u, prob)])
    run.add("uniqueness", [verify_elliptic_uniqueness(prob, u)])
    _field_outputs(run, u, _orders(run, "alpha", "beta", "gamma"), ("x", "y"))


def _run_laplace(run: _Run, batch: bool) -> None:
    p = run.p
    if batch:
        run.add_groups(batches.laplace_batch(run.s.seed, p["n_x"], p["count"]))
        plotting.plot_margins(run.all_reports(), run.path("margins.png"), "cylinder checks")
        return
    xg, yg = Grid1D(p["x_lo"], p["x_hi"], p["n_x"]), Grid1D(p["y_lo"], p["y_hi"], p["n_y"])
    X, Y = np.meshgrid(xg.nodes, yg.nodes, indexing="ij")
    prob = CylinderProblem(
        xg, yg, p["alpha"], p["beta"], FracLaplacianSpec(p["delta"]), run.s.expr("f")(X, Y),
        SampledFn(yg, run.s.expr("phi1")(yg.nodes), "phi1"), SampledFn(yg, run.s.expr("phi2")(yg.nodes), "phi2"),
    )
    u = solve_cylinder(prob)
    run.add("cylinder", verify_cylinder_principles(u, prob))
    _field_outputs(run, u, _orders(run, "alpha", "beta", "delta"), ("x", "y"))


def _dispatch(run: _Run, force_batch: bool) -> None:
    kind = run.s.kind
    if kind == "op":
        _run_op(run)
    elif kind == "extremum":
        _run_extremum(run)
    else:
        batch = force_batch or run.p["mode"] == "batch"
        {
            "ode": _run_ode,
            "diffusion": _run_diffusion,
            "pseudo": _run_pseudo,
            "elliptic": _run_elliptic,
            "laplace": _run_laplace,
        }[kind](run, batch)


# ------------------------------------------------------------------ running


def _report_line(group: str, report) -> str:
    d = report.to_dict()
    d["group"] = group
    return json.dumps(d, sort_keys=True, allow_nan=False)


def run(
    scenario: Scenario,
    out_dir: str | os.PathLike,
    tol_scale: float = 1.0,
    force_batch: bool = False,
    echo: Callable[[str], None] | None = None,
) -> RunSummary:
    """Run one scenario into ``out_dir``; ``summary.json`` is written last.

    Module errors stop the run; whatever was produced stays on disk and the
    summary is flagged ``partial``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    r = _Run(scenario, out, tol_scale)
    start = time.perf_counter()
    error, code = "", None
    try:
        _dispatch(r, force_batch)
    except (DomainError, UsageError) as exc:
        error, code = f"{scenario.name}: {type(exc).__name__}: {exc}", 2
    except FracmaxError as exc:
        error, code = f"{scenario.name}: {type(exc).__name__}: {exc}", 1
    wall = time.perf_counter() - start

    lines = [_report_line(g, rep) for g, reps in r.groups.items() for rep in reps]
    if lines or r.groups:
        atomic_write_text(r.path("reports.jsonl"), "".join(line + "\n" for line in lines))
    if echo is not None:
        for line in lines:
            echo(line)
    reports = r.all_reports()
    counts = summarize(reports)
    if code is None:
        code = 1 if counts["failed"] else 0
    summary = {
        "scenario": scenario.name,
        "kind": scenario.kind,
        "seed": scenario.seed,
        "tol_scale": tol_scale,
        "counts": counts,
        "groups": {g: summarize(reps) for g, reps in r.groups.items()},
        "artifacts": sorted(set(r.artifacts)),
        "partial": bool(error),
        "error": error,
        "exit_code": code,
    }
    # written last so its presence marks a finished run
    atomic_write_text(out / "summary.json", json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return RunSummary(scenario.name, wall, reports, sorted(set(r.artifacts)) + ["summary.json"],
                      summary["groups"], error, code)


def _out_dir(args, scenario: Scenario | None) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get("FRACMAX_OUT"):
        return Path(os.environ["FRACMAX_OUT"])
    if scenario is not None and scenario.output_dir:
        base = Path(scenario.source).parent if scenario.source else Path(".")
        return base / scenario.output_dir
    return Path("fracmax_out")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario file (INI)")
    common.add_argument("--seed", type=_seed, help="override the scenario seed")
    common.add_argument("--out", help="output directory (default $FRACMAX_OUT or ./fracmax_out)")
    common.add_argument("--tol-scale", type=_positive_float, default=1.0, help="multiply every check tolerance")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")

    parser = argparse.ArgumentParser(prog="fracmax", description="Fractional operators, solvers and principle checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("op", parents=[common], help="apply a fractional operator to sampled data")
    v = sub.add_parser("verify", parents=[common], help="run a random verification batch")
    v.add_argument("kind", nargs="?", choices=SUBCOMMAND_KINDS["verify"], help="batch kind when no scenario is given")
    for name in ("solve-ode", "solve-diffusion", "solve-pseudo", "solve-elliptic", "solve-laplace"):
        sub.add_parser(name, parents=[common], help=f"solve one {name[6:]} scenario and check it")
    pd = sub.add_parser("plot-data", parents=[common], help="convert a binary solution field to gnuplot triplets")
    pd.add_argument("field", help="binary field written by a solve subcommand")
    return parser


def _load(args) -> Scenario:
    allowed = SUBCOMMAND_KINDS[args.command]
    if args.scenario:
        s = parse_scenario(args.scenario)
        if getattr(args, "kind", None) and args.kind != s.kind:
            raise UsageError(f"scenario kind {s.kind!r} does not match requested {args.kind!r}")
    else:
        kind = getattr(args, "kind", None) or (allowed[0] if len(allowed) == 1 else None)
        if kind is None:
            raise UsageError(f"{args.command} needs --scenario or a kind ({', '.join(allowed)})")
        if any(p.required for p in SCHEMAS[kind].values()):
            raise UsageError(f"kind {kind!r} has required keys; pass --scenario")
        s = parse_scenario_text(f"[scenario]\nkind = {kind}\nname = {kind}\n")
    if s.kind not in allowed:
        raise UsageError(f"{args.command} runs kinds {', '.join(allowed)}; scenario has kind {s.kind!r}")
    if args.seed is not None:
        s = s.with_seed(args.seed)
    return s


def _plot_data(args) -> int:
    field = load_field_binary(args.field)
    out = _out_dir(args, None)
    stem = Path(args.field).stem
    dat, side = emit_plot_data(field, out / f"{stem}.dat", {"source": Path(args.field).name})
    if not args.quiet:
        print(dat)
        print(side)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "plot-data":
            return _plot_data(args)
        scenario = _load(args)
    except ValidationError as exc:
        for line in exc.problems:
            print(f"fracmax: {line}", file=sys.stderr)
        return 2
    except (UsageError, OSError) as exc:
        print(f"fracmax: {exc}", file=sys.stderr)
        return 2
    out = _out_dir(args, scenario) / scenario.name
    summary = run(
        scenario, out, args.tol_scale, force_batch=args.command == "verify",
        echo=None if args.quiet else print,
    )
    if summary.error:
        print(f"fracmax: {summary.error}", file=sys.stderr)
    if not args.quiet:
        c = summarize(summary.reports)
        print(
            f"fracmax: {scenario.name}: {c['passed']} passed, {c['failed']} failed, "
            f"{c['informational']} informational in {summary.wall_time:.2f} s -> {out}",
            file=sys.stderr,
        )
    return summary.exit_code


if __name__ == "__main__":
    sys.exit(main())
