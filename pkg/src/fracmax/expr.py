"""Safe arithmetic expressions for scenario data such as ``F = sin(pi*x)*t``.

Only numeric literals, the named variables, ``pi``/``e``, arithmetic
operators and a fixed set of numpy functions are accepted.
"""

from __future__ import annotations

import ast

import numpy as np

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "tanh": np.tanh,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "minimum": np.minimum,
    "maximum": np.maximum,
}
CONSTANTS = {"pi": np.pi, "e": np.e}
_OPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Mod)


class ExprError(ValueError):
    pass


def _check(node: ast.AST, names: frozenset[str]) -> None:
    if isinstance(node, ast.Expression):
        _check(node.body, names)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _OPS):
            raise ExprError(f"operator {type(node.op).__name__} not allowed")
        _check(node.left, names)
        _check(node.right, names)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _OPS):
            raise ExprError(f"operator {type(node.op).__name__} not allowed")
        _check(node.operand, names)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS or node.keywords:
            raise ExprError("only calls to " + ", ".join(sorted(FUNCTIONS)) + " are allowed")
        for arg in node.args:
            _check(arg, names)
    elif isinstance(node, ast.Name):
        if node.id not in names and node.id not in CONSTANTS:
            raise ExprError(f"unknown name {node.id!r}; allowed: {', '.join(sorted(names))}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ExprError(f"literal {node.value!r} not allowed")
    else:
        raise ExprError(f"syntax {type(node).__name__} not allowed")


class Expr:
    """Compiled expression in a fixed set of variables, evaluated with numpy broadcasting."""

    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text.strip()
        self.variables = variables
        try:
            tree = ast.parse(self.text, mode="eval")
        except SyntaxError as exc:
            raise ExprError(f"cannot parse {text!r}: {exc.msg}") from exc
        _check(tree, frozenset(variables))
        self._code = compile(tree, "<scenario>", "eval")
        self.uses = {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)} & set(variables)

    def __call__(self, *args) -> np.ndarray:
        env = dict(FUNCTIONS)
        env.update(CONSTANTS)
        env.update(zip(self.variables, args))
        with np.errstate(all="ignore"):
            out = eval(self._code, {"__builtins__": {}}, env)
        shape = np.broadcast_shapes(*[np.shape(a) for a in args]) if args else ()
        return np.broadcast_to(np.asarray(out, dtype=np.float64), shape).copy()

    def __repr__(self) -> str:
        return f"Expr({self.text!r})"
