import json
import shutil
import subprocess
import sys

import pytest

from dirackit.harness.checks import CHECKS, Options, run_check
from dirackit.harness.cli import main
from dirackit.harness.document import InputError, iter_expressions, load_document, parse_document
from dirackit.harness.propositions import PROPOSITIONS, verify_proposition
from dirackit.harness.runner import corpus_paths, exit_code, render, run_corpus, run_path
from dirackit.exact import Chart, parse_expr, print_expr

FAST = Options(seed=0, samples=10)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- documents ---------------------------------------------------------------------

def test_corpus_is_nonempty_and_ids_match_files():
    paths = corpus_paths()
    assert len(paths) >= 20
    for p in paths:
        assert load_document(p).id == p.stem


def test_every_corpus_expression_round_trips():
    count = 0
    for p in corpus_paths():
        raw = json.loads(p.read_text())
        for where, text, names in iter_expressions(raw):
            chart = Chart(list(names))
            f = parse_expr(text, chart)
            assert parse_expr(print_expr(f), chart) == f, where
            count += 1
    assert count > 100


@pytest.mark.parametrize(
    "raw,fragment",
    [
        ({"id": "a", "chart": "x", "checks": []}, "chart"),
        ({"id": "a", "chart": ["x"], "checks": ["nope"]}, "nope"),
        ({"id": "a", "chart": ["x", "x"], "checks": []}, "chart"),
        ({"id": "a", "chart": ["x", "y"], "poisson": [[0, "x +"], ["-x", 0]], "checks": ["poisson"]}, "poisson"),
    ],
)
def test_malformed_documents_raise_input_error(raw, fragment):
    with pytest.raises(InputError) as info:
        doc = parse_document(raw)
        doc.validate()
        for name in doc.checks:
            run_check(name, doc, FAST)
    assert fragment in str(info.value)


def test_every_check_is_registered_with_a_corpus_user():
    used = set()
    for p in corpus_paths():
        used.update(load_document(p).checks)
    for ident, prop in PROPOSITIONS.items():
        for _, names in prop["instances"]:
            used.update(names)
    assert used <= set(CHECKS)
    assert set(CHECKS) <= used


# -- runner ------------------------------------------------------------------------

def test_reducible_items_pass():
    reports = run_corpus("reducible-*", FAST, timing=False)
    assert [r.id for r in reports] == ["reducible-r3", "reducible-rescaled-r3"]
    assert all(r.verdict == "PASS" for r in reports)
    assert exit_code(reports) == 0


def test_expected_fail_counts_as_pass():
    rep = run_corpus("non-poisson-r3", FAST, timing=False)[0]
    assert rep.verdict == "PASS"
    entry = next(c for c in rep.checks if c["name"] == "poisson")
    assert entry["verdict"] == "FAIL" and entry["outcome"] == "PASS"
    assert entry["witness"] == "[pi,pi] = (2)*d/dx^d/dy^d/dz"


def test_degree_bound_gives_inconclusive():
    rep = run_corpus("exactness-square-r1", Options(seed=0, samples=10, degree_bound=0), timing=False)[0]
    assert rep.verdict == "INCONCLUSIVE"
    assert exit_code([rep]) == 2


def test_corrupted_item_is_isolated(tmp_path):
    for name in ("symplectic-r2", "poisson-x-r2"):
        shutil.copy(next(p for p in corpus_paths() if p.stem == name), tmp_path)
    (tmp_path / "broken.json").write_text('{"id": "broken", "chart": ["x"], "poisson": [[0]], "checks": ["poisson"')
    (tmp_path / "bad-expr.json").write_text(json.dumps({"id": "bad-expr", "chart": ["x", "y"], "poisson": [[0, "x +"], ["-x", 0]], "checks": ["poisson"]}))
    reports = run_corpus(None, FAST, timing=False, directory=tmp_path)
    verdicts = {r.id: r.verdict for r in reports}
    assert verdicts == {"bad-expr": "ERROR", "broken": "ERROR", "poisson-x-r2": "PASS", "symplectic-r2": "PASS"}
    assert exit_code(reports) == 3
    assert "input error" in next(r for r in reports if r.id == "broken").witness


def test_json_is_deterministic_across_runs_and_jobs():
    a = render(run_corpus(None, Options(seed=3, samples=10), timing=False), True)
    b = render(run_corpus(None, Options(seed=3, samples=10), timing=False, jobs=2), True)
    assert a == b
    payload = json.loads(a)
    assert all(r["seed"] == 3 and r["millis"] is None for r in payload)


def test_pass_report_carries_certificates():
    rep = run_path(next(p for p in corpus_paths() if p.stem == "poisson-x-r2"), FAST, timing=False)
    out = rep.to_json()
    assert out["verdict"] == "PASS" and "certificate" in out and "witness" not in out


# -- propositions --------------------------------------------------------------------

@pytest.mark.parametrize("ident", sorted(PROPOSITIONS))
def test_propositions_pass(ident):
    rep = verify_proposition(ident, FAST, timing=False)
    assert rep.verdict == "PASS", rep.witness


def test_flip_sharp_control_fails():
    rep = verify_proposition("prop-bialgebroid-iso", Options(seed=0, samples=10, flip_sharp=True), timing=False)
    assert rep.verdict == "FAIL"
    assert "structure function c^1_1,2: 1 vs -1" in rep.witness


# -- command line ----------------------------------------------------------------------

def test_cli_check_and_json(capsys):
    path = str(next(p for p in corpus_paths() if p.stem == "so3-lie-poisson"))
    code, out, _ = run_cli(capsys, "check", path, "--json", "--no-timing", "--samples", "10")
    assert code == 0
    doc = json.loads(out)
    assert doc["id"] == "so3-lie-poisson" and doc["verdict"] == "PASS"


def test_cli_corpus_filter(capsys):
    code, out, _ = run_cli(capsys, "corpus", "--filter", "reducible-*", "--samples", "10")
    assert code == 0
    assert out.count("PASS") >= 2 and "reducible-r3" in out


def test_cli_global_options_before_subcommand(capsys):
    code, out, _ = run_cli(capsys, "--json", "--no-timing", "--samples", "5", "corpus", "--filter", "exactness-log*")
    assert code == 0
    data = json.loads(out)
    assert data[0]["id"] == "exactness-log-r1" and data[0]["millis"] is None
    code, out, _ = run_cli(capsys, "--degree-bound", "0", "corpus", "--filter", "exactness-square*")
    assert code == 2 and "INCONCLUSIVE" in out


def test_cli_corpus_no_match(capsys):
    code, _, err = run_cli(capsys, "corpus", "--filter", "zzz*")
    assert code == 3 and "no corpus items" in err


def test_cli_prove(capsys):
    code, out, _ = run_cli(capsys, "prove", "lemma-cartan", "--samples", "10")
    assert code == 0 and "PASS" in out
    code, out, _ = run_cli(capsys, "prove", "prop-bialgebroid-iso", "--flip-sharp", "--samples", "10")
    assert code == 1 and "structure function" in out
    code, out, _ = run_cli(capsys, "prove", "list")
    assert code == 0 and "prop-modphi-zero" in out
    code, _, err = run_cli(capsys, "prove", "prop-unknown")
    assert code == 3 and "unknown proposition" in err


def test_cli_bracket(capsys):
    path = str(next(p for p in corpus_paths() if p.stem == "bialgebroid-tstar-x"))
    code, out, _ = run_cli(capsys, "bracket", "--bialgebroid", path, "--json")
    assert code == 0
    data = json.loads(out)
    assert data["bracket"] == "bialgebroid" and data["values"]["[s1,s2]"]["form"] == ["1", "0"]
    code, out, _ = run_cli(capsys, "bracket", "--courant", path)
    assert code == 0 and out.startswith("[s1,s2] = ")


def test_cli_image(capsys):
    path = str(next(p for p in corpus_paths() if p.stem == "poisson-map-projection"))
    code, out, _ = run_cli(capsys, "image", "--forward", path, "--at", "1/2,3")
    assert code == 0 and "dimension 1" in out
    code, out, _ = run_cli(capsys, "image", "--backward", path, "--at", "1/2,3", "--json")
    assert code == 0 and json.loads(out)["image"] == "backward"
    code, _, err = run_cli(capsys, "image", "--forward", path, "--at", "1/2")
    assert code == 3 and "expected 2 coordinates" in err


def test_cli_missing_file(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "check", str(tmp_path / "missing.json"))
    assert code == 3 and "ERROR" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dirackit.harness.cli", "prove", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "lemma-cartan" in proc.stdout
