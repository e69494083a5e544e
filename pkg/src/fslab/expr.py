"""A tiny arithmetic expression grammar for metric and 1-form configs.

Expressions use Python syntax restricted to numbers, the variables
``u1, u2, y1, y2``, the operators ``+ - * / **`` and the functions
``sqrt, sin, cos, exp, log``.  Compiled expressions evaluate with numpy
functions, so they accept floats, arrays and :class:`~fslab.jets.Jet`.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import ConfigError

VARIABLES = ("u1", "u2", "y1", "y2")
FUNCTIONS = {"sqrt": np.sqrt, "sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log}
CONSTANTS = {"pi": np.pi}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


class Expression:
    """A parsed expression; call it with keyword values for the variables."""

    def __init__(self, source: str):
        self.source = source.strip()
        try:
            tree = ast.parse(self.source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse expression {source!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body
        self.variables = sorted(
            {n.id for n in ast.walk(tree) if isinstance(n, ast.Name) and n.id in VARIABLES}
        )

    def _check(self, node):
        if isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ConfigError(f"operator not allowed in {self.source!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.UAdd, ast.USub)):
                raise ConfigError(f"operator not allowed in {self.source!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in FUNCTIONS):
                raise ConfigError(f"unknown function in {self.source!r}")
            if len(node.args) != 1 or node.keywords:
                raise ConfigError(f"functions take one argument in {self.source!r}")
            self._check(node.args[0])
        elif isinstance(node, ast.Name):
            if node.id not in VARIABLES and node.id not in CONSTANTS:
                raise ConfigError(f"unknown name {node.id!r} in {self.source!r}")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ConfigError(f"non-numeric literal in {self.source!r}")
        else:
            raise ConfigError(f"unsupported syntax in {self.source!r}")

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            val = self._eval(node.operand, env)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.Call):
            return FUNCTIONS[node.func.id](self._eval(node.args[0], env))
        if isinstance(node, ast.Name):
            if node.id in CONSTANTS:
                return CONSTANTS[node.id]
            return env[node.id]
        return float(node.value)

    def __call__(self, **env):
        missing = [v for v in self.variables if v not in env]
        if missing:
            raise ConfigError(f"expression {self.source!r} needs {missing}")
        return self._eval(self._tree, env)

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"
