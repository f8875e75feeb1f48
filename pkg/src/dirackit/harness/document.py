"""JSON documents describing charts, structures, maps and the checks to run.

Every scalar is an expression string in the exact-algebra grammar (plain
integers are accepted too).  Frame indices in documents are 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any

from ..algebroid import Algebroid, Cochain, TrivializationChoice, cotangent_algebroid, tangent_algebroid
from ..calculus import PolyMap, TensorField, bivector, two_form, vector_field
from ..courant import GenSection, section
from ..dirac import DiracSpec, Reduction, cotangent_dirac, graph_of_bivector, graph_of_twoform, tangent_dirac
from ..exact import Chart, ExprSyntaxError, RatFun, parse_expr
from ..maps import DiracMapProblem
from ..sampling import DEFAULT_SAMPLES, DEFAULT_SEED

__all__ = ["InputError", "Document", "Structure", "load_document", "parse_document", "iter_expressions"]

TOP_LEVEL = {
    "id",
    "description",
    "provenance",
    "chart",
    "poisson",
    "twoform",
    "algebroid",
    "dirac",
    "map_problem",
    "reduction",
    "checks",
    "expected",
    "values",
    "sections",
    "lemma",
}


class InputError(ValueError):
    """Malformed document: bad JSON, unknown blocks, bad expressions or shapes."""


def _expr(value, chart: Chart, where: str) -> RatFun:
    if isinstance(value, bool):
        raise InputError(f"{where}: expected an expression, got {value!r}")
    if isinstance(value, int):
        return RatFun.const(chart, value)
    if not isinstance(value, str):
        raise InputError(f"{where}: expected an expression string, got {value!r}")
    try:
        return parse_expr(value, chart)
    except ExprSyntaxError as exc:
        raise InputError(f"{where}: {exc}") from None


def _list(value, where: str, length: int | None = None) -> list:
    if not isinstance(value, list):
        raise InputError(f"{where}: expected a list")
    if length is not None and len(value) != length:
        raise InputError(f"{where}: expected {length} entries, got {len(value)}")
    return value


def _exprs(values, chart: Chart, where: str, length: int | None = None) -> list[RatFun]:
    return [_expr(v, chart, f"{where}[{i}]") for i, v in enumerate(_list(values, where, length))]


def _matrix(values, chart: Chart, where: str) -> list[list[RatFun]]:
    n = chart.dim
    rows = _list(values, where, n)
    return [_exprs(r, chart, f"{where}[{i}]", n) for i, r in enumerate(rows)]


def _chart(value, where: str) -> Chart:
    names = _list(value, where)
    try:
        return Chart(names)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _wrap(fn, where: str):
    try:
        return fn()
    except InputError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(f"{where}: {exc}") from None


@dataclass
class Structure:
    """A chart with the geometric data attached to it (source or target of a map)."""

    raw: dict
    where: str

    @cached_property
    def chart(self) -> Chart:
        if "chart" not in self.raw:
            raise InputError(f"{self.where}: missing 'chart'")
        return _chart(self.raw["chart"], f"{self.where}.chart")

    @cached_property
    def poisson(self) -> TensorField | None:
        if "poisson" not in self.raw:
            return None
        m = _matrix(self.raw["poisson"], self.chart, f"{self.where}.poisson")
        return _wrap(lambda: bivector(self.chart, m), f"{self.where}.poisson")

    @cached_property
    def twoform(self) -> TensorField | None:
        if "twoform" not in self.raw:
            return None
        m = _matrix(self.raw["twoform"], self.chart, f"{self.where}.twoform")
        return _wrap(lambda: two_form(self.chart, m), f"{self.where}.twoform")

    @cached_property
    def reduction(self) -> Reduction | None:
        block = self.raw.get("reduction")
        if block is None:
            return None
        where = f"{self.where}.reduction"
        if not isinstance(block, dict):
            raise InputError(f"{where}: expected an object")
        quotient = _chart(block.get("quotient_vars"), f"{where}.quotient_vars")
        comps = _exprs(block.get("projection"), self.chart, f"{where}.projection", quotient.dim)
        return Reduction(quotient, _wrap(lambda: PolyMap(self.chart, quotient, comps), f"{where}.projection"))

    @cached_property
    def dirac(self) -> DiracSpec | None:
        block = self.raw.get("dirac")
        if block is None:
            return None
        where = f"{self.where}.dirac"
        if not isinstance(block, dict):
            raise InputError(f"{where}: expected an object")
        chart = self.chart
        ambient = None
        if "ambient_poisson" in block:
            ambient = _wrap(lambda: bivector(chart, _matrix(block["ambient_poisson"], chart, f"{where}.ambient_poisson")), where)
        if "graph" in block:
            kind = block["graph"]
            if kind == "poisson":
                if self.poisson is None:
                    raise InputError(f"{where}: graph of 'poisson' needs a poisson block")
                spec = _wrap(lambda: graph_of_bivector(self.poisson), where)
            elif kind == "twoform":
                if self.twoform is None:
                    raise InputError(f"{where}: graph of 'twoform' needs a twoform block")
                spec = _wrap(lambda: graph_of_twoform(self.twoform), where)
            else:
                raise InputError(f"{where}.graph: expected 'poisson' or 'twoform'")
            gens = spec.generators
        elif "kind" in block:
            kind = block["kind"]
            if kind == "tangent":
                gens = tangent_dirac(chart).generators
            elif kind == "cotangent":
                gens = cotangent_dirac(chart).generators
            else:
                raise InputError(f"{where}.kind: expected 'tangent' or 'cotangent'")
        else:
            gens = [self._section(g, f"{where}.generators[{i}]") for i, g in enumerate(_list(block.get("generators"), f"{where}.generators"))]
        name = str(self.raw.get("id", ""))
        return _wrap(lambda: DiracSpec(chart, tuple(gens), ambient, self.reduction, name=name), where)

    def _section(self, g, where: str) -> GenSection:
        if not isinstance(g, dict):
            raise InputError(f"{where}: expected {{vec, form}}")
        n = self.chart.dim
        vec = _exprs(g.get("vec", [0] * n), self.chart, f"{where}.vec", n)
        form = _exprs(g.get("form", [0] * n), self.chart, f"{where}.form", n)
        return section(self.chart, vec, form)

    @cached_property
    def sections(self) -> list[GenSection]:
        block = self.raw.get("sections")
        if block is None:
            return []
        return [self._section(g, f"{self.where}.sections[{i}]") for i, g in enumerate(_list(block, f"{self.where}.sections"))]

    @cached_property
    def algebroid(self) -> Algebroid | None:
        block = self.raw.get("algebroid")
        where = f"{self.where}.algebroid"
        if block is None:
            return cotangent_algebroid(self.poisson) if self.poisson is not None else None
        if not isinstance(block, dict):
            raise InputError(f"{where}: expected an object")
        chart = self.chart
        if block.get("kind") == "tangent":
            return tangent_algebroid(chart)
        if block.get("kind") == "cotangent":
            if self.poisson is None:
                raise InputError(f"{where}: cotangent algebroid needs a poisson block")
            return cotangent_algebroid(self.poisson)
        rank = block.get("rank")
        if not isinstance(rank, int) or rank < 0:
            raise InputError(f"{where}.rank: expected a non-negative integer")
        anchor = [_exprs(r, chart, f"{where}.anchor[{i}]", chart.dim) for i, r in enumerate(_list(block.get("anchor"), f"{where}.anchor", rank))]
        entries = []
        for t, e in enumerate(_list(block.get("structure", []), f"{where}.structure")):
            w = f"{where}.structure[{t}]"
            if not isinstance(e, dict):
                raise InputError(f"{w}: expected {{i, j, k, expr}}")
            try:
                i, j, k = int(e["i"]) - 1, int(e["j"]) - 1, int(e["k"]) - 1
            except (KeyError, TypeError, ValueError):
                raise InputError(f"{w}: needs integer i, j, k") from None
            if not all(0 <= x < rank for x in (i, j, k)):
                raise InputError(f"{w}: index out of range 1..{rank}")
            entries.append((i, j, k, _expr(e.get("expr"), chart, f"{w}.expr")))
        anchors = [vector_field(chart, r) for r in anchor]
        return _wrap(lambda: Algebroid.from_sparse(chart, anchors, entries), where)

    @cached_property
    def trivialization(self) -> TrivializationChoice:
        block = self.raw.get("algebroid") or {}
        where = f"{self.where}.algebroid"
        scale = block.get("frame_scale") if isinstance(block, dict) else None
        vol = block.get("volume") if isinstance(block, dict) else None
        return TrivializationChoice(
            _expr(scale, self.chart, f"{where}.frame_scale") if scale is not None else None,
            _expr(vol, self.chart, f"{where}.volume") if vol is not None else None,
        )

    @cached_property
    def cochain(self) -> Cochain | None:
        block = self.raw.get("algebroid")
        if not isinstance(block, dict) or "cochain" not in block:
            return None
        A = self.algebroid
        values = _exprs(block["cochain"], self.chart, f"{self.where}.algebroid.cochain", A.rank)
        return Cochain.from_values(self.chart, values)


@dataclass
class Document(Structure):
    path: str | None = None

    @cached_property
    def id(self) -> str:
        value = self.raw.get("id")
        if value is None:
            return Path(self.path).stem if self.path else "document"
        return str(value)

    @cached_property
    def checks(self) -> list[str]:
        return [str(c) for c in _list(self.raw.get("checks", []), "checks")]

    @cached_property
    def expected(self) -> dict[str, str]:
        block = self.raw.get("expected", {})
        if not isinstance(block, dict):
            raise InputError("expected: expected an object")
        out = {}
        for k, v in block.items():
            if v not in ("PASS", "FAIL", "INCONCLUSIVE"):
                raise InputError(f"expected.{k}: verdict must be PASS, FAIL or INCONCLUSIVE")
            out[str(k)] = v
        return out

    @cached_property
    def values(self) -> dict[str, Any]:
        block = self.raw.get("values", {})
        if not isinstance(block, dict):
            raise InputError("values: expected an object")
        return block

    @cached_property
    def provenance(self) -> dict[str, str]:
        return dict(self.raw.get("provenance", {}))

    def _side(self, key: str) -> Structure:
        block = self.raw.get("map_problem", {}).get(key)
        if block == "self" or block is None:
            return self
        if not isinstance(block, dict):
            raise InputError(f"map_problem.{key}: expected 'self' or a structure object")
        return Structure(block, f"map_problem.{key}")

    @cached_property
    def map_source(self) -> Structure:
        return self._side("source")

    @cached_property
    def map_target(self) -> Structure:
        return self._side("target")

    @cached_property
    def map(self) -> PolyMap | None:
        block = self.raw.get("map_problem")
        if block is None:
            return None
        src, tgt = self.map_source.chart, self.map_target.chart
        comps = _exprs(block.get("map"), src, "map_problem.map", tgt.dim)
        return _wrap(lambda: PolyMap(src, tgt, comps), "map_problem.map")

    def map_problem(self, samples: int | None = None, seed: int | None = None) -> DiracMapProblem | None:
        block = self.raw.get("map_problem")
        if block is None:
            return None
        L, K = self.map_source.dirac, self.map_target.dirac
        if L is None or K is None:
            raise InputError("map_problem: source and target need dirac blocks")
        if samples is None:
            samples = int(block.get("samples", DEFAULT_SAMPLES))
        if seed is None:
            seed = int(block.get("seed", DEFAULT_SEED))
        return _wrap(lambda: DiracMapProblem(self.map, L, K, samples, seed), "map_problem")

    def validate(self) -> None:
        """Force every block to parse so input errors surface before any check runs."""
        unknown = set(self.raw) - TOP_LEVEL
        if unknown:
            raise InputError(f"unknown top-level blocks: {', '.join(sorted(unknown))}")
        _ = self.chart, self.poisson, self.twoform, self.reduction, self.dirac, self.algebroid
        _ = self.trivialization, self.cochain, self.checks, self.expected, self.values, self.sections
        if "map_problem" in self.raw:
            _ = self.map_source.dirac, self.map_target.dirac, self.map_target.reduction, self.map
            self.map_problem()


def parse_document(raw: dict, path: str | None = None) -> Document:
    if not isinstance(raw, dict):
        raise InputError("document must be a JSON object")
    doc = Document(raw, "document", path)
    doc.validate()
    return doc


def load_document(path) -> Document:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return parse_document(raw, str(path))


def iter_expressions(raw, chart_names=None, where="document"):
    """Yield ``(where, expression string, chart names)`` for every expression in a raw document."""
    if isinstance(raw, dict):
        names = raw.get("chart", chart_names)
        for key, value in raw.items():
            if key in ("id", "description", "provenance", "checks", "expected", "values", "chart", "graph", "kind"):
                continue
            if key == "reduction" and isinstance(value, dict):
                yield from iter_expressions(value.get("projection", []), names, f"{where}.reduction.projection")
                continue
            if key == "map_problem" and isinstance(value, dict):
                for side in ("source", "target"):
                    if isinstance(value.get(side), dict):
                        yield from iter_expressions(value[side], None, f"{where}.map_problem.{side}")
                src = value.get("source")
                map_names = src.get("chart") if isinstance(src, dict) else names
                yield from iter_expressions(value.get("map", []), map_names, f"{where}.map_problem.map")
                continue
            if key in ("i", "j", "k", "rank", "samples", "seed"):
                continue
            if key == "lemma" and isinstance(value, dict):
                sub_names = value.get("quotient_chart")
                for k2, v2 in value.items():
                    if k2 in ("quotient_chart",):
                        continue
                    target_names = sub_names if k2 in ("alpha", "beta", "poisson") else names
                    yield from iter_expressions(v2, target_names, f"{where}.lemma.{k2}")
                continue
            yield from iter_expressions(value, names, f"{where}.{key}")
    elif isinstance(raw, list):
        for i, v in enumerate(raw):
            yield from iter_expressions(v, chart_names, f"{where}[{i}]")
    elif isinstance(raw, str) and chart_names is not None:
        yield where, raw, tuple(chart_names)
