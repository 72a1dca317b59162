"""Evaluation of radial potentials and the Kähler potential f(S) = log S + g(S).

``eval_g_jet`` / ``eval_f_jet`` return exact (up to round-off) jets of g and f.
``KahlerPotential.radial_terms`` packages the three combinations every
curvature formula is built from,

    f_S,   M = f_S + S f_SS,   N = f_S + 3 S f_SS + S^2 f_SSS,

computed so that the logarithmic parts cancel analytically; they stay accurate
as S -> 0 and are defined at S = 0 itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import jets
from .errors import DomainError, EvaluationOverflow
from .expression import BinOp, Call, Const, Neg, Node, Num, PotentialExpr, Var, parse_potential
from .jets import Jet3, Scalar

_CONSTANTS = {"pi": math.pi, "e": math.e}


def _evaluate_jet(node: Node, s: Jet3) -> Jet3:
    if isinstance(node, Num):
        return Jet3.constant(node.value)
    if isinstance(node, Var):
        return s
    if isinstance(node, Const):
        return Jet3.constant(_CONSTANTS[node.name])
    if isinstance(node, Neg):
        return -_evaluate_jet(node.operand, s)
    if isinstance(node, Call):
        return jets.FUNCTIONS[node.func](_evaluate_jet(node.arg, s))
    if isinstance(node, BinOp):
        left = _evaluate_jet(node.left, s)
        right = _evaluate_jet(node.right, s)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            return left / right
        return left**right
    raise TypeError(f"not an expression node: {node!r}")


def _as_radial(S: Scalar) -> Scalar:
    S = np.asarray(S, dtype=float) if np.ndim(S) else float(S)
    if np.any(S < 0):
        raise DomainError("S must be nonnegative")
    return S


def eval_g_jet(expr: PotentialExpr, S: Scalar) -> Jet3:
    """(g, g_S, g_SS, g_SSS) at S >= 0; S may be a numpy array."""
    S = _as_radial(S)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = _evaluate_jet(expr.root, Jet3.variable(S))
    if not out.is_finite():
        raise EvaluationOverflow(f"non-finite jet of {expr.text or expr} at S = {S}")
    return out


def log_jet(S: Scalar) -> Jet3:
    inv = 1.0 / S
    return Jet3(np.log(S), inv, -inv * inv, 2.0 * inv * inv * inv)


def eval_f_jet(expr: PotentialExpr, S: Scalar) -> Jet3:
    """Jet of f = log S + g at S > 0."""
    S = _as_radial(S)
    if np.any(S <= 0):
        raise DomainError("f = log S + g is singular at S <= 0")
    return log_jet(S) + eval_g_jet(expr, S)


_PLAIN_FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
}


def _evaluate_plain(node: Node, S: Scalar) -> Scalar:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return S
    if isinstance(node, Const):
        return _CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_evaluate_plain(node.operand, S)
    if isinstance(node, Call):
        arg = _evaluate_plain(node.arg, S)
        if node.func == "log" and np.any(np.asarray(arg) <= 0):
            raise DomainError("log of a nonpositive argument")
        if node.func == "sqrt" and np.any(np.asarray(arg) < 0):
            raise DomainError("sqrt of a negative argument")
        return _PLAIN_FUNCTIONS[node.func](arg)
    if isinstance(node, BinOp):
        left = _evaluate_plain(node.left, S)
        right = _evaluate_plain(node.right, S)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if np.any(np.asarray(right) == 0):
                raise DomainError("division by zero")
            return left / right
        return np.power(left, right)
    raise TypeError(f"not an expression node: {node!r}")


def eval_plain(expr: PotentialExpr, S: Scalar) -> Scalar:
    """Plain value of the expression, without derivatives."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        value = _evaluate_plain(expr.root, np.asarray(S, dtype=float) if np.ndim(S) else float(S))
    if not np.all(np.isfinite(value)):
        raise DomainError(f"non-finite value of {expr.text or expr} at S = {S}")
    return value


@dataclass(frozen=True)
class RadialTerms:
    S: Scalar
    f_S: Scalar
    inv_f_S: Scalar
    M: Scalar
    N: Scalar


@dataclass(frozen=True)
class KahlerPotential:
    """Radial Kähler potential.

    ``direct=False``: f = log S + g with ``expr`` = g (the blow-up class).
    ``direct=True``:  ``expr`` is f itself (e.g. the flat metric f = S).
    """

    expr: PotentialExpr
    direct: bool = False

    @classmethod
    def flat(cls) -> "KahlerPotential":
        return cls(parse_potential("S"), direct=True)

    @property
    def label(self) -> str:
        text = self.expr.text or str(self.expr)
        return f"f = {text}" if self.direct else f"g = {text}"

    def f_jet(self, S: Scalar) -> Jet3:
        if self.direct:
            return eval_g_jet(self.expr, S)
        return eval_f_jet(self.expr, S)

    def radial_terms(self, S: Scalar) -> RadialTerms:
        S = _as_radial(S)
        if self.direct:
            f = eval_g_jet(self.expr, S)
            f_S = f.v1
            with np.errstate(divide="ignore"):
                inv_f_S = np.divide(1.0, f_S)
            M = f.v1 + S * f.v2
            N = f.v1 + 3.0 * S * f.v2 + S * S * f.v3
            return RadialTerms(S, f_S, inv_f_S, M, N)
        g = eval_g_jet(self.expr, S)
        # log S contributes 1/S to f_S and nothing to M or N.
        M = g.v1 + S * g.v2
        N = g.v1 + 3.0 * S * g.v2 + S * S * g.v3
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_f_S = np.divide(S, 1.0 + S * g.v1)
            f_S = np.divide(1.0, S) + g.v1
        return RadialTerms(S, f_S, inv_f_S, M, N)


PotentialLike = Union[PotentialExpr, KahlerPotential]


def as_kahler(potential: PotentialLike) -> KahlerPotential:
    if isinstance(potential, KahlerPotential):
        return potential
    return KahlerPotential(potential)
