"""Tiny arithmetic expression language for config-supplied signals.

Supports numbers, named variables, ``+ - * / **`` (``^`` is accepted as a
power too), unary minus, parentheses, and the functions sin, cos, abs,
sqrt, exp and tanh. Anything else is rejected at parse time.
"""

from __future__ import annotations

import ast
import math
import operator
from typing import Callable, Mapping

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "abs": abs,
    "sqrt": math.sqrt,
    "exp": math.exp,
    "tanh": math.tanh,
}
CONSTANTS = {"pi": math.pi}


class ExpressionError(ValueError):
    pass


class Expression:
    """A parsed expression; call it with a mapping of variable values."""

    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text.strip()
        self.variables = variables
        try:
            tree = ast.parse(self.text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse expression {text!r}: {exc.msg}") from None
        self._check(tree.body)
        self._code = compile(tree, "<expr>", "eval")
        self._const = None
        if not self._names(tree.body):
            self._const = float(Expression.__call__(self, {}))

    def _names(self, node) -> set[str]:
        return {
            n.id
            for n in ast.walk(node)
            if isinstance(n, ast.Name) and n.id not in FUNCTIONS and n.id not in CONSTANTS
        }

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ExpressionError(f"unsupported literal in {self.text!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ExpressionError(f"unsupported operator in {self.text!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNOPS:
                raise ExpressionError(f"unsupported operator in {self.text!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                raise ExpressionError(f"unknown function in {self.text!r}")
            if len(node.args) != 1 or node.keywords:
                raise ExpressionError(f"functions take exactly one argument in {self.text!r}")
            self._check(node.args[0])
        elif isinstance(node, ast.Name):
            if node.id not in self.variables and node.id not in CONSTANTS:
                raise ExpressionError(
                    f"unknown name {node.id!r} in {self.text!r}; allowed: {', '.join(self.variables)}"
                )
        else:
            raise ExpressionError(f"unsupported syntax in {self.text!r}")

    @property
    def constant(self) -> float | None:
        """The value if the expression has no free variables, else None."""
        return self._const

    def __call__(self, env: Mapping[str, float]) -> float:
        scope = {**FUNCTIONS, **CONSTANTS, **env}
        return float(eval(self._code, {"__builtins__": {}}, scope))

    def __repr__(self):
        return f"Expression({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and self.text == other.text and self.variables == other.variables

    def __hash__(self):
        return hash((self.text, self.variables))


class StateFunction(Expression):
    """Expression in rho1..rhoN, called with the state vector."""

    def __init__(self, text: str, n: int):
        super().__init__(text, tuple(f"rho{j + 1}" for j in range(n)))

    def __call__(self, rho) -> float:
        if self._const is not None:
            return self._const
        return super().__call__({f"rho{j + 1}": v for j, v in enumerate(rho)})

    def max_index(self) -> int:
        """Highest state index referenced (0 when constant)."""
        tree = ast.parse(self.text.replace("^", "**"), mode="eval")
        return max((int(name[3:]) for name in self._names(tree.body)), default=0)


class TimeFunction(Expression):
    """Expression in t, called with the time."""

    def __init__(self, text: str):
        super().__init__(text, ("t",))

    def __call__(self, t: float) -> float:
        if self._const is not None:
            return self._const
        return super().__call__({"t": t})
