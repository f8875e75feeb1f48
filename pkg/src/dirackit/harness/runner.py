"""Run documents and corpus items, aggregate verdicts, render reports."""

from __future__ import annotations

import fnmatch
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .checks import ERROR, FAIL, INCONCLUSIVE, PASS, CheckResult, Options, run_check
from .document import Document, InputError, load_document

__all__ = [
    "ItemReport",
    "run_document",
    "run_path",
    "run_corpus",
    "corpus_paths",
    "corpus_document",
    "exit_code",
    "render",
]

EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2, ERROR: 3}


@dataclass
class ItemReport:
    id: str
    verdict: str
    seed: int
    millis: int | None = None
    checks: list[dict] = field(default_factory=list)
    witness: str | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "verdict": self.verdict, "seed": self.seed, "millis": self.millis, "checks": self.checks}
        if self.verdict == PASS:
            out["certificate"] = {c["name"]: c.get("certificate") for c in self.checks}
        else:
            out["witness"] = self.witness
        return out


def _aggregate(outcomes: list[tuple[str, str]]) -> str:
    kinds = {o for _, o in outcomes}
    for v in (ERROR, FAIL, INCONCLUSIVE):
        if v in kinds:
            return v
    return PASS


def _outcome(raw: str, expected: str) -> str:
    """Item-level effect of a check: matching the expectation passes."""
    if raw == expected:
        return PASS
    if INCONCLUSIVE in (raw, expected):
        return INCONCLUSIVE
    return FAIL


def run_document(doc: Document, opts: Options, timing: bool = True) -> ItemReport:
    start = time.perf_counter()
    seed = opts.seed_for(doc)
    entries, outcomes = [], []
    witness = None
    for name in doc.checks:
        expected = doc.expected.get(name, PASS)
        try:
            res = run_check(name, doc, opts)
        except InputError as exc:
            res = CheckResult(ERROR, None, f"input error: {exc}")
        except (ValueError, ArithmeticError) as exc:
            res = CheckResult(ERROR, None, f"{type(exc).__name__}: {exc}")
        outcome = ERROR if res.verdict == ERROR else _outcome(res.verdict, expected)
        entry = {"name": name, "expected": expected, "outcome": outcome, **res.to_json()}
        entries.append(entry)
        outcomes.append((name, outcome))
        if outcome != PASS and witness is None:
            witness = f"{name}: " + (res.witness or f"expected {expected}, got {res.verdict}")
    millis = round((time.perf_counter() - start) * 1000) if timing else None
    return ItemReport(doc.id, _aggregate(outcomes), seed, millis, entries, witness)


def _error_report(ident: str, exc: Exception, opts: Options) -> ItemReport:
    return ItemReport(ident, ERROR, opts.seed if opts.seed is not None else 0, None, [], f"input error: {exc}")


def run_path(path, opts: Options, timing: bool = True) -> ItemReport:
    try:
        doc = load_document(path)
    except InputError as exc:
        return _error_report(Path(path).stem, exc, opts)
    return run_document(doc, opts, timing)


def corpus_paths(directory=None) -> list[Path]:
    if directory is None:
        directory = Path(str(resources.files("dirackit.harness") / "corpus"))
    return sorted(Path(directory).glob("*.json"))


def corpus_document(ident: str, directory=None) -> Document:
    for p in corpus_paths(directory):
        if p.stem == ident:
            return load_document(p)
    raise KeyError(f"no corpus item {ident!r}")


def _run_one(args) -> ItemReport:
    path, opts, timing = args
    return run_path(path, opts, timing)


def run_corpus(pattern: str | None = None, opts: Options | None = None, timing: bool = True, jobs: int = 1, directory=None) -> list[ItemReport]:
    """Run every corpus item whose id matches the glob ``pattern``; reports are ordered by id."""
    opts = opts or Options()
    paths = [p for p in corpus_paths(directory) if pattern is None or fnmatch.fnmatchcase(p.stem, pattern)]
    work = [(p, opts, timing) for p in paths]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_one, work))
    else:
        reports = [_run_one(w) for w in work]
    return sorted(reports, key=lambda r: r.id)


def exit_code(reports) -> int:
    verdicts = {r.verdict for r in reports}
    for v in (ERROR, FAIL, INCONCLUSIVE):
        if v in verdicts:
            return EXIT_CODES[v]
    return 0


def render(reports, as_json: bool, single: bool = False) -> str:
    """Text or JSON; with ``single`` the JSON is one object instead of a list."""
    if as_json:
        payload = [r.to_json() for r in reports]
        return json.dumps(payload[0] if single else payload, sort_keys=True, indent=2)
    lines = []
    for r in reports:
        t = "" if r.millis is None else f" ({r.millis} ms)"
        lines.append(f"{r.verdict:<12} {r.id}{t}")
        for c in r.checks:
            mark = "ok" if c["outcome"] == PASS else c["outcome"].lower()
            note = f"  [{c['verdict']}, expected {c['expected']}]" if c["verdict"] != c["expected"] or c["outcome"] != PASS else ""
            lines.append(f"    {mark:<13}{c['name']}{note}")
            if c["outcome"] != PASS and c.get("witness"):
                lines.append(f"                 {c['witness']}")
    return "\n".join(lines)
