"""Shared strategies and helpers for the test suite."""

from __future__ import annotations

import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dirackit.calculus import bivector, one_form, vector_field
from dirackit.exact import Chart, Poly, RatFun

settings.register_profile(
    "default",
    max_examples=int(os.environ.get("DIRACKIT_EXAMPLES", "25")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("default")

XY = Chart(["x", "y"])
XYZ = Chart(["x", "y", "z"])


def polys(chart: Chart, max_deg: int = 2, max_terms: int = 3):
    exps = st.tuples(*[st.integers(0, max_deg)] * chart.dim)
    coeffs = st.integers(-3, 3)
    return st.dictionaries(exps, coeffs, max_size=max_terms).map(lambda d: RatFun(chart, Poly(chart, d)))


def nonzero_polys(chart: Chart, max_deg: int = 2):
    return polys(chart, max_deg).filter(bool)


def ratfuns(chart: Chart, max_deg: int = 2):
    return st.builds(lambda n, d: n / d, polys(chart, max_deg), nonzero_polys(chart, 1))


def vector_fields(chart: Chart, max_deg: int = 2):
    return st.lists(polys(chart, max_deg), min_size=chart.dim, max_size=chart.dim).map(lambda c: vector_field(chart, c))


def one_forms(chart: Chart, max_deg: int = 2):
    return st.lists(polys(chart, max_deg), min_size=chart.dim, max_size=chart.dim).map(lambda c: one_form(chart, c))


def bivectors(chart: Chart, max_deg: int = 1):
    n = chart.dim
    npairs = n * (n - 1) // 2

    def build(entries):
        m = [[chart.zero()] * n for _ in range(n)]
        it = iter(entries)
        for i in range(n):
            for j in range(i + 1, n):
                v = next(it)
                m[i][j], m[j][i] = v, -v
        return bivector(chart, m)

    return st.lists(polys(chart, max_deg), min_size=npairs, max_size=npairs).map(build)
