"""A tiny arithmetic expression language for scenario fields.

Allowed: numbers, ``+ - * /``, unary minus, ``sin cos exp``, the names
``x y z pi P1 P2 L`` and any scenario parameter.  Everything else (powers,
attribute access, other calls, comparisons) is rejected with the position of
the offending token.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

__all__ = ["Expression", "ExpressionError", "parse_expression", "RESERVED"]

FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
RESERVED = ("x", "y", "z", "pi", "P1", "P2", "L")
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}


class ExpressionError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Expression:
    source: str
    tree: ast.Expression
    names: frozenset

    def __call__(self, env: dict) -> np.ndarray:
        return _eval(self.tree.body, env)

    def sample(self, grid, params: dict, shift=(0.0, 0.0, 0.0)) -> np.ndarray:
        """Evaluate on the grid nodes (optionally shifted), broadcast to the full shape."""
        X, Y, Z = grid.mesh()
        env = dict(params)
        env.update(x=X + shift[0], y=Y + shift[1], z=Z + shift[2], pi=np.pi, P1=grid.P1, P2=grid.P2, L=grid.L)
        return np.broadcast_to(np.asarray(self(env), dtype=float), grid.shape).copy()


def _pos(node) -> tuple[int, int]:
    return getattr(node, "lineno", 1), getattr(node, "col_offset", 0) + 1


def _check(node, allowed: set):
    if isinstance(node, ast.Expression):
        return _check(node.body, allowed)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"unsupported constant {node.value!r}", *_pos(node))
        return
    if isinstance(node, ast.Name):
        if node.id not in allowed:
            raise ExpressionError(f"unknown name {node.id!r}", *_pos(node))
        return
    if isinstance(node, ast.BinOp):
        if type(node.op) not in _BINOPS:
            raise ExpressionError(f"operator {type(node.op).__name__} is not allowed", *_pos(node))
        _check(node.left, allowed)
        _check(node.right, allowed)
        return
    if isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ExpressionError(f"operator {type(node.op).__name__} is not allowed", *_pos(node))
        _check(node.operand, allowed)
        return
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            raise ExpressionError("only sin, cos and exp may be called", *_pos(node))
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes exactly one argument", *_pos(node))
        _check(node.args[0], allowed)
        return
    raise ExpressionError(f"unsupported syntax {type(node).__name__}", *_pos(node))


def _eval(node, env):
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        val = _eval(node.operand, env)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.Call):
        return FUNCTIONS[node.func.id](_eval(node.args[0], env))
    raise AssertionError("unchecked node")


def parse_expression(source: str, parameters=()) -> Expression:
    """Parse and validate ``source``; ``parameters`` are the extra allowed names."""
    if not isinstance(source, str):
        source = repr(source)
    clash = set(parameters) & (set(RESERVED) | set(FUNCTIONS))
    if clash:
        raise ExpressionError(f"parameter names shadow reserved names: {sorted(clash)}")
    try:
        tree = ast.parse(source.strip() or "0", mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"syntax error: {exc.msg}", exc.lineno or 1, exc.offset or 1) from None
    allowed = set(RESERVED) | set(parameters)
    _check(tree, allowed)
    names = frozenset(n.id for n in ast.walk(tree) if isinstance(n, ast.Name)) - set(FUNCTIONS)
    return Expression(source, tree, names)
