"""A small closed expression language for density factors.

Grammar: numeric literals, the variable ``t``, the constants ``i`` and
``pi``, the operators ``+ - * / **`` and the functions ``exp``, ``sin``,
``cos``, ``sqrt`` (principal branch).  Decimal literals are read from the
source text, so ``0.7`` means exactly seven tenths at any precision.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Callable

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import InvalidInputError

__all__ = ["Expression"]

_FUNCS = {
    "exp": np.frompyfunc(gmpy2.exp, 1, 1),
    "sin": np.frompyfunc(gmpy2.sin, 1, 1),
    "cos": np.frompyfunc(gmpy2.cos, 1, 1),
    "sqrt": np.frompyfunc(gmpy2.sqrt, 1, 1),
}
_SCALAR_FUNCS = {"exp": gmpy2.exp, "sin": gmpy2.sin, "cos": gmpy2.cos, "sqrt": gmpy2.sqrt}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}


def _compile(node: ast.AST, src: str) -> tuple[Callable, bool]:
    """Return (evaluator(t), depends_on_t)."""
    if isinstance(node, ast.Expression):
        return _compile(node.body, src)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise InvalidInputError(f"unsupported literal {node.value!r}")
        text = ast.get_source_segment(src, node)
        if isinstance(node.value, int):
            val = int(node.value)
            return (lambda t: mpc(val)), False
        return (lambda t: mpc(mpfr(text))), False
    if isinstance(node, ast.Name):
        if node.id == "t":
            return (lambda t: t), True
        if node.id == "i":
            return (lambda t: mpc(0, 1)), False
        if node.id == "pi":
            return (lambda t: mpc(gmpy2.const_pi())), False
        raise InvalidInputError(f"unknown name {node.id!r}; only t, i, pi are defined")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        f, dep = _compile(node.operand, src)
        if isinstance(node.op, ast.USub):
            return (lambda t: -f(t)), dep
        return f, dep
    if isinstance(node, ast.BinOp):
        lf, ldep = _compile(node.left, src)
        if isinstance(node.op, ast.Pow):
            right = node.right
            neg = isinstance(right, ast.UnaryOp) and isinstance(right.op, ast.USub)
            inner = right.operand if neg else right
            if isinstance(inner, ast.Constant) and isinstance(inner.value, int) and not isinstance(inner.value, bool):
                k = -inner.value if neg else inner.value
                # integer exponents stay exact and branch-free
                return (lambda t: lf(t) ** k), ldep
            rf, rdep = _compile(right, src)
            return (lambda t: lf(t) ** rf(t)), ldep or rdep
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise InvalidInputError(f"unsupported operator {type(node.op).__name__}")
        rf, rdep = _compile(node.right, src)
        return (lambda t: op(lf(t), rf(t))), ldep or rdep
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise InvalidInputError("only exp, sin, cos, sqrt may be called")
        if len(node.args) != 1 or node.keywords:
            raise InvalidInputError(f"{node.func.id} takes exactly one argument")
        vf, sf = _FUNCS[node.func.id], _SCALAR_FUNCS[node.func.id]
        af, dep = _compile(node.args[0], src)

        def call(t, af=af, vf=vf, sf=sf):
            a = af(t)
            return vf(a) if isinstance(a, np.ndarray) else sf(a)

        return call, dep
    raise InvalidInputError(f"unsupported syntax: {ast.dump(node)[:60]}")


@dataclass(frozen=True)
class Expression:
    """Compiled expression in the variable ``t``.

    Calling it on an object array of mpc evaluates elementwise at the active
    gmpy2 precision; the result always has the shape of the input.
    """

    source: str
    _fn: Callable = field(init=False, repr=False, compare=False)
    depends_on_t: bool = field(init=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.source, str) or not self.source.strip():
            raise InvalidInputError("expression must be a non-empty string")
        if "**" not in self.source and "^" in self.source:
            raise InvalidInputError("use ** for powers")
        try:
            tree = ast.parse(self.source.strip(), mode="eval")
        except SyntaxError as exc:
            raise InvalidInputError(f"cannot parse expression {self.source!r}: {exc.msg}") from exc
        fn, dep = _compile(tree, self.source.strip())
        object.__setattr__(self, "_fn", fn)
        object.__setattr__(self, "depends_on_t", dep)

    def __call__(self, t):
        out = self._fn(t)
        if isinstance(t, np.ndarray) and not isinstance(out, np.ndarray):
            out = np.full(t.shape, out, dtype=object)
        return out

    def __str__(self) -> str:
        return self.source
