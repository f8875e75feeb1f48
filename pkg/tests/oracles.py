"""Independent reference computations used by the tests."""

from __future__ import annotations

import sympy

from dirackit.calculus import MULTIVECTOR, TensorField
from dirackit.exact import Chart, print_expr


def _merge_sign(a, b):
    seq = list(a) + list(b)
    if len(set(seq)) != len(seq):
        return 0, None
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign, tuple(sorted(seq))


def _right_odd_derivative(comps, i):
    out = {}
    for key, v in comps.items():
        if i in key:
            pos = key.index(i)
            sign = -1 if (len(key) - 1 - pos) % 2 else 1
            rest = key[:pos] + key[pos + 1:]
            out[rest] = out.get(rest, 0) + (v if sign > 0 else -v)
    return out


def oracle_schouten(P: TensorField, Q: TensorField, chart: Chart):
    p, q = P.degree, Q.degree
    acc = {}

    def add(A, B):
        for ka, va in A.items():
            for kb, vb in B.items():
                s, key = _merge_sign(ka, kb)
                if s:
                    acc[key] = acc.get(key, chart.zero()) + (va * vb if s > 0 else -(va * vb))

    eps = -1 if ((p - 1) * (q - 1)) % 2 else 1
    for i in range(chart.dim):
        dQ = {k: v.diff(i) for k, v in Q.comps.items()}
        dP = {k: (v.diff(i) if eps < 0 else -v.diff(i)) for k, v in P.comps.items()}
        add(_right_odd_derivative(P.comps, i), dQ)
        add(_right_odd_derivative(Q.comps, i), dP)
    return TensorField(chart, MULTIVECTOR, p + q - 1, {k: v for k, v in acc.items() if v})


def to_sympy(f, chart: Chart):
    syms = {v: sympy.Symbol(v) for v in chart.vars}
    return sympy.sympify(print_expr(f).replace("^", "**"), locals=syms)


def oracle_modular_vector_field(pi: TensorField, chart: Chart) -> list:
    """Components ``X^j = sum_i d_i pi^{ji}`` computed with sympy, standard volume."""
    syms = [sympy.Symbol(v) for v in chart.vars]
    n = chart.dim
    out = []
    for j in range(n):
        total = 0
        for i in range(n):
            if i != j:
                total += sympy.diff(to_sympy(pi[(j, i)], chart), syms[i])
        out.append(sympy.simplify(total))
    return out
