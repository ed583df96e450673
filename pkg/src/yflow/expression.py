"""Tiny arithmetic language for initial data written as functions of r.

Supported: numbers, ``r``, ``pi``, ``e``, ``+ - * / **`` (``^`` is accepted as
a power), unary minus and the functions exp, cosh, sinh, sech, tanh, sqrt.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

from .errors import ConfigurationError

_FUNCS = {
    "exp": np.exp,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "sech": lambda x: 1.0 / np.cosh(x),
    "tanh": np.tanh,
    "sqrt": np.sqrt,
}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _compile(node: ast.AST):
    if isinstance(node, ast.Expression):
        return _compile(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        value = float(node.value)
        return lambda r: value
    if isinstance(node, ast.Name):
        if node.id == "r":
            return lambda r: r
        if node.id in _CONSTS:
            value = _CONSTS[node.id]
            return lambda r: value
        raise ConfigurationError(f"unknown name {node.id!r} in expression")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand)
        if isinstance(node.op, ast.USub):
            return lambda r: -inner(r)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _compile(node.left), _compile(node.right)
        return lambda r: op(left(r), right(r))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords:
        fn = _FUNCS[node.func.id]
        arg = _compile(node.args[0])
        return lambda r: fn(arg(r))
    raise ConfigurationError(f"unsupported construct in expression: {ast.dump(node)}")


def parse_expression(text: str):
    """Compile ``text`` into a vectorised function of r."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ConfigurationError(f"cannot parse expression {text!r}: {exc.msg}") from exc
    fn = _compile(tree)

    def evaluate(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(fn(r), dtype=float), r.shape).copy()

    return evaluate
