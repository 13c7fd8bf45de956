"""Scenario files: a ``[scenario]`` header section and a flat ``[parameters]`` section.

Example::

    [scenario]
    kind = diffusion
    seed = 42
    output_dir = runs

    [parameters]
    alpha = 0.5
    F = sin(pi*x)*t

Every key is validated against the schema of its kind; unknown keys,
missing required keys, type mismatches and range violations are collected
and raised together as one ``ValidationError`` with line numbers.
Data fields are arithmetic expressions (see ``fracmax.expr``).
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import ValidationError
from .expr import Expr, ExprError

KINDS = ("op", "extremum", "ode", "diffusion", "pseudo", "elliptic", "laplace")
HEADER_KEYS = ("kind", "seed", "output_dir", "name")


@dataclass(frozen=True)
class Param:
    type: str  # int, float, str, bool, choice, expr
    default: Any = None
    required: bool = False
    check: Callable[[Any], str | None] | None = None
    choices: tuple[str, ...] = ()
    variables: tuple[str, ...] = ()


def _unit(v: float) -> str | None:
    return None if 0.0 < v <= 1.0 else "must satisfy 0 < value <= 1"


def _open_unit(v: float) -> str | None:
    return None if 0.0 < v < 1.0 else "must satisfy 0 < value < 1"


def _positive(v: float) -> str | None:
    return None if v > 0 else "must be positive"


def _min_int(lo: int) -> Callable[[int], str | None]:
    return lambda v: None if v >= lo else f"must be at least {lo}"


def _count(v: int) -> str | None:
    return None if v >= 0 else "must be non-negative"


def _order(default: float) -> Param:
    return Param("float", default, check=_unit)


def _x(text: str) -> Param:
    return Param("expr", text, variables=("x",))


_GRID = {"a": Param("float", 0.0), "b": Param("float", 1.0)}
_MODE = Param("choice", "single", choices=("single", "batch"))

SCHEMAS: dict[str, dict[str, Param]] = {
    "op": {
        "operation": Param(
            "choice",
            required=True,
            choices=(
                "caputo", "rl_integral", "rl_derivative", "sequential_caputo",
                "caputo_order12", "rl_order12", "regional_laplacian",
            ),
        ),
        "function": Param("expr", "t", variables=("t",)),
        "input": Param("str", ""),
        **_GRID,
        "n": Param("int", 1024, check=_min_int(2)),
        "alpha": Param("float", 0.5, check=lambda v: None if 0.0 < v < 2.0 else "must satisfy 0 < value < 2"),
        "beta": _order(0.5),
        "delta": Param("float", 0.5, check=_open_unit),
    },
    "extremum": {
        "mode": Param("choice", "batch", choices=("batch", "single", "witness")),
        "check": Param(
            "choice", "sequential_min",
            choices=("sequential_min", "sequential_max", "caputo_max", "rl_max", "order12_min"),
        ),
        "function": Param("expr", "(t - 0.4)**2", variables=("t",)),
        **_GRID,
        "n": Param("int", 2048, check=_min_int(4)),
        "alpha": Param("float", 0.6, check=lambda v: None if 0.0 < v < 2.0 else "must satisfy 0 < value < 2"),
        "beta": _order(0.6),
        "count": Param("int", 200, check=_count),
        "base_tol": Param("float", 1e-4, check=_positive),
        "eq_tol": Param("float", 5e-3, check=_positive),
    },
    "ode": {
        "mode": _MODE,
        **_GRID,
        "n": Param("int", 1024, check=_min_int(2)),
        "alpha": _order(0.7),
        "beta": _order(0.6),
        "q": _x("-1"),
        "f": _x("1"),
        "u_a": Param("float", 0.0),
        "v_a": Param("float", 0.0),
        "signs": Param("int", 50, check=_count),
        "pairs": Param("int", 50, check=_count),
        "sandwiches": Param("int", 10, check=_count),
    },
    "diffusion": {
        "mode": _MODE,
        **_GRID,
        "T": Param("float", 1.0, check=_positive),
        "n_x": Param("int", 128, check=_min_int(2)),
        "n_t": Param("int", 128, check=_min_int(1)),
        "alpha": _order(0.5),
        "beta1": _order(0.9),
        "beta2": _order(0.9),
        "nu": Param("float", 1.0, check=_positive),
        "F": Param("expr", "0", variables=("x", "t", "u")),
        "phi": _x("0"),
        "psi_a": Param("expr", "0", variables=("t",)),
        "psi_b": Param("expr", "0", variables=("t",)),
        "nonlinear": Param("bool", False),
        "count": Param("int", 25, check=_count),
        "pairs": Param("int", 10, check=_count),
    },
    "pseudo": {
        "mode": _MODE,
        **_GRID,
        "T": Param("float", 1.0, check=_positive),
        "n_x": Param("int", 128, check=_min_int(2)),
        "n_t": Param("int", 128, check=_min_int(1)),
        "alpha": _order(0.5),
        "beta1": _order(0.9),
        "beta2": _order(0.9),
        "nu": Param("float", 1.0, check=_positive),
        "F": Param("expr", "0", variables=("x", "t", "u")),
        "phi": _x("0"),
        "psi1": Param("expr", "0", variables=("t",)),
        "psi2": Param("expr", "0", variables=("t",)),
        "nonlinear": Param("bool", False),
        "count": Param("int", 15, check=_count),
    },
    "elliptic": {
        "mode": _MODE,
        "dims": Param("int", 2, check=lambda v: None if v in (1, 2) else "must be 1 or 2"),
        "n": Param("int", 64, check=_min_int(2)),
        "x_lo": Param("float", 0.0),
        "x_hi": Param("float", 1.0),
        "y_lo": Param("float", 0.0),
        "y_hi": Param("float", 1.0),
        "alpha": _order(0.7),
        "beta": _order(0.6),
        "gamma": _order(0.5),
        "coef_a": Param("expr", "1", variables=("x", "y")),
        "coef_b": Param("expr", "0", variables=("x", "y")),
        "coef_c": Param("expr", "-1", variables=("x", "y")),
        "coef_d": Param("expr", "-1", variables=("x", "y")),
        "F": Param("expr", "1", variables=("x", "y")),
        "phi": Param("expr", "0", variables=("x", "y")),
        "count": Param("int", 25, check=_count),
        "cylinders": Param("int", 15, check=_count),
    },
    "laplace": {
        "mode": _MODE,
        "x_lo": Param("float", 0.0),
        "x_hi": Param("float", 1.0),
        "y_lo": Param("float", -1.0),
        "y_hi": Param("float", 1.0),
        "n_x": Param("int", 64, check=_min_int(2)),
        "n_y": Param("int", 64, check=_min_int(2)),
        "alpha": _order(0.7),
        "beta": _order(0.6),
        "delta": Param("float", 0.5, check=_open_unit),
        "f": Param("expr", "1", variables=("x", "y")),
        "phi1": Param("expr", "0", variables=("y",)),
        "phi2": Param("expr", "0", variables=("y",)),
        "count": Param("int", 15, check=_count),
    },
}


@dataclass(frozen=True)
class Scenario:
    kind: str
    parameters: dict[str, Any]
    seed: int = 42
    output_dir: str = ""
    name: str = "scenario"
    source: str = field(default="", compare=False)

    def expr(self, key: str) -> Expr:
        p = SCHEMAS[self.kind][key]
        return Expr(self.parameters[key], p.variables)

    def with_seed(self, seed: int) -> "Scenario":
        return Scenario(self.kind, dict(self.parameters), seed, self.output_dir, self.name, self.source)


def _line_map(text: str) -> dict[tuple[str, str], int]:
    """``(section, key) -> line number`` for error messages."""
    out: dict[tuple[str, str], int] = {}
    section = ""
    for k, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            out[(section, "")] = k
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section:
            out.setdefault((section, m.group(1).strip()), k)
    return out


def _where(lines: dict, section: str, key: str) -> str:
    k = lines.get((section, key))
    return f"[{section}] {key}" + (f" (line {k})" if k else "")


def _convert(raw: str, p: Param) -> Any:
    """Typed value or raises ``ValueError`` with a readable message."""
    raw = raw.strip()
    if p.type == "int":
        try:
            return int(raw, 10)
        except ValueError:
            raise ValueError(f"expected an integer, got {raw!r}") from None
    if p.type == "float":
        try:
            return float(raw)
        except ValueError:
            raise ValueError(f"expected a number, got {raw!r}") from None
    if p.type == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected true/false, got {raw!r}")
    if p.type == "choice":
        if raw not in p.choices:
            raise ValueError(f"expected one of {', '.join(p.choices)}, got {raw!r}")
        return raw
    if p.type == "expr":
        try:
            Expr(raw, p.variables)
        except ExprError as exc:
            raise ValueError(str(exc)) from None
        return raw
    return raw


def parse_scenario_text(text: str, source: str = "<string>") -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keys are case-sensitive (F vs f)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ValidationError([f"{source}: {exc}".replace("\n", " ")]) from None
    lines = _line_map(text)
    problems: list[str] = []

    for sec in cp.sections():
        if sec not in ("scenario", "parameters"):
            problems.append(f"{_where(lines, sec, '')}: unknown section; expected [scenario] and [parameters]")
    if not cp.has_section("scenario"):
        raise ValidationError(problems + [f"{source}: missing [scenario] section"])
    head = cp["scenario"]
    for key in head:
        if key not in HEADER_KEYS:
            problems.append(f"{_where(lines, 'scenario', key)}: unknown key; allowed: {', '.join(HEADER_KEYS)}")
    kind = head.get("kind", "").strip()
    if not kind:
        raise ValidationError(problems + [f"[scenario]: missing required key 'kind'"])
    if kind not in KINDS:
        raise ValidationError(problems + [f"{_where(lines, 'scenario', 'kind')}: expected one of {', '.join(KINDS)}, got {kind!r}"])
    seed = 42
    if "seed" in head:
        try:
            seed = int(head["seed"].strip(), 10)
            if not 0 <= seed < 2**64:
                problems.append(f"{_where(lines, 'scenario', 'seed')}: must satisfy 0 <= seed < 2**64")
        except ValueError:
            problems.append(f"{_where(lines, 'scenario', 'seed')}: expected an integer, got {head['seed']!r}")

    schema = SCHEMAS[kind]
    raw = dict(cp["parameters"]) if cp.has_section("parameters") else {}
    params: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in schema:
            problems.append(f"{_where(lines, 'parameters', key)}: unknown key for kind {kind!r}")
            continue
        p = schema[key]
        try:
            v = _convert(value, p)
        except ValueError as exc:
            problems.append(f"{_where(lines, 'parameters', key)}: {exc}")
            continue
        if p.check is not None and (msg := p.check(v)) is not None:
            problems.append(f"{_where(lines, 'parameters', key)}: {key}={v!r} {msg}")
            continue
        params[key] = v
    for key, p in schema.items():
        if key not in raw:
            if p.required:
                problems.append(f"[parameters] {key}: missing required key for kind {kind!r}")
            else:
                params[key] = p.default
    if not problems:
        problems.extend(_cross_checks(kind, params, lines))
    if problems:
        raise ValidationError(problems)
    name = head.get("name", "").strip() or (Path(source).stem if source != "<string>" else "scenario")
    return Scenario(kind, params, seed, head.get("output_dir", "").strip(), name, source)


def _cross_checks(kind: str, params: dict[str, Any], lines: dict) -> list[str]:
    out = []

    def at(key: str) -> str:
        return _where(lines, "parameters", key)

    if kind in ("diffusion", "pseudo") and params["beta1"] + params["beta2"] <= 1.0:
        out.append(f"{at('beta2')}: beta1 + beta2 = {params['beta1'] + params['beta2']:g} must exceed 1")
    if kind in ("elliptic", "laplace", "ode") and params["alpha"] + params["beta"] <= 1.0:
        out.append(f"{at('beta')}: alpha + beta = {params['alpha'] + params['beta']:g} must exceed 1")
    if kind in ("diffusion", "pseudo") and not params["nonlinear"]:
        if "u" in Expr(params["F"], ("x", "t", "u")).uses:
            out.append(f"{at('F')}: F depends on u; set nonlinear = true")
    if kind in ("op", "extremum"):
        order12 = params.get("operation", params.get("check", "")) in ("caputo_order12", "rl_order12", "order12_min")
        if order12 and not 1.0 < params["alpha"] < 2.0:
            out.append(f"{at('alpha')}: alpha={params['alpha']!r} must satisfy 1 < alpha < 2 for order-(1,2) operations")
        if not order12 and not 0.0 < params["alpha"] <= 1.0:
            out.append(f"{at('alpha')}: alpha={params['alpha']!r} must satisfy 0 < alpha <= 1")
    for lo, hi in (("a", "b"), ("x_lo", "x_hi"), ("y_lo", "y_hi")):
        if lo in params and params[lo] >= params[hi]:
            out.append(f"{at(hi)}: {hi}={params[hi]!r} must exceed {lo}={params[lo]!r}")
    return out


def parse_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError([f"{path}: cannot read scenario ({exc.strerror})"]) from None
    return parse_scenario_text(text, str(path))


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_scenario(s: Scenario) -> str:
    """Text that parses back to an equal ``Scenario``."""
    out = ["[scenario]", f"kind = {s.kind}", f"seed = {s.seed}", f"name = {s.name}"]
    if s.output_dir:
        out.append(f"output_dir = {s.output_dir}")
    out += ["", "[parameters]"]
    out += [f"{k} = {_format(v)}" for k, v in s.parameters.items()]
    return "\n".join(out) + "\n"
