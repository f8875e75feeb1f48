"""Exact rational, polynomial and rational-function arithmetic."""

from .linalg import (
    InconsistentSystem,
    LinearSolution,
    RatMatrix,
    generic_rank,
    in_span,
    kernel,
    rank,
    rref,
    same_span,
    solve_linear,
)
from .parse import ExprSyntaxError, UnknownVariable, parse_expr, print_expr
from .ratfun import Chart, ChartMismatch, PoleError, Poly, RatFun, as_fraction


def ratfun_arith(a: RatFun, b: RatFun, op: str) -> RatFun:
    """Binary field operation by name: ``add``, ``sub``, ``mul`` or ``div``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def eval_point(f: RatFun, point):
    return f.eval(point)


__all__ = [
    "Chart",
    "ChartMismatch",
    "ExprSyntaxError",
    "InconsistentSystem",
    "LinearSolution",
    "PoleError",
    "Poly",
    "RatFun",
    "RatMatrix",
    "UnknownVariable",
    "as_fraction",
    "eval_point",
    "generic_rank",
    "in_span",
    "kernel",
    "parse_expr",
    "print_expr",
    "rank",
    "ratfun_arith",
    "rref",
    "same_span",
    "solve_linear",
]
