"""Deterministic rational sample points that avoid the poles of given data."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable

from .exact import Chart, PoleError, RatFun

__all__ = ["sample_points", "DEFAULT_SAMPLES", "DEFAULT_SEED"]

DEFAULT_SAMPLES = 100
DEFAULT_SEED = 0


def _height(dim: int, count: int) -> int:
    # numerators in [-h, h]; widened on low-dimensional charts so enough distinct points exist
    h = 9
    while (2 * h + 1) ** dim * 2 < 4 * count:
        h *= 2
    return h


def _draw(rng: random.Random, dim: int, h: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(rng.randint(-h, h), rng.randint(1, 4)) for _ in range(dim))


def sample_points(
    chart: Chart,
    funcs: Iterable[RatFun] = (),
    count: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    max_tries: int | None = None,
) -> list[tuple[Fraction, ...]]:
    """``count`` distinct small rational points where every denominator in ``funcs`` is nonzero.

    Points are drawn from ``random.Random(seed)``; a point is rejected when any
    of the functions has a pole there.  Raises RuntimeError if the budget of
    draws runs out.
    """
    dens = []
    seen_dens = set()
    for f in funcs:
        d = f.den
        if d.degree() > 0 and d not in seen_dens:
            seen_dens.add(d)
            dens.append(f.den)
    rng = random.Random(seed)
    tries = max_tries if max_tries is not None else 50 * count + 100
    points: list[tuple[Fraction, ...]] = []
    seen = set()
    if chart.dim == 0:
        return [()] * count
    h = _height(chart.dim, count)
    for _ in range(tries):
        if len(points) == count:
            break
        p = _draw(rng, chart.dim, h)
        if p in seen:
            continue
        if any(d(p) == 0 for d in dens):
            continue
        seen.add(p)
        points.append(p)
    if len(points) < count:
        raise RuntimeError(f"only {len(points)} pole-free sample points found in {tries} draws")
    return points


def safe_eval(f: RatFun, point) -> Fraction | None:
    try:
        return f.eval(point)
    except PoleError:
        return None
