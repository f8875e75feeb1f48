"""``dirackit`` command line: check documents, run the corpus, verify propositions,
print brackets and pointwise images."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from ..courant import bialgebroid_bracket, courant_bracket
from ..exact import PoleError
from ..maps import backward_image_point, forward_image_point
from .checks import Options
from .document import InputError, load_document
from .propositions import PROPOSITIONS, UnknownProposition, verify_proposition
from .runner import exit_code, render, run_corpus, run_path

INPUT_ERROR = 3


def _common(top: bool) -> argparse.ArgumentParser:
    # subcommands must not reset what was given before the subcommand name
    def dflt(value):
        return value if top else argparse.SUPPRESS

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=dflt(None), help="sampling seed (overrides the document)")
    common.add_argument("--samples", type=int, default=dflt(None), help="number of sample points")
    common.add_argument("--degree-bound", type=int, default=dflt(2), help="degree bound for exactness searches")
    common.add_argument("--json", action="store_true", default=dflt(False), help="emit JSON")
    common.add_argument("--no-timing", action="store_true", default=dflt(False), help="report millis as null (byte-stable output)")
    return common


def _parser() -> argparse.ArgumentParser:
    common = _common(False)
    p = argparse.ArgumentParser(prog="dirackit", description=__doc__, parents=[_common(True)])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="run the checks a document declares")
    c.add_argument("file")

    c = sub.add_parser("corpus", parents=[common], help="run the built-in corpus")
    c.add_argument("--filter", default=None, help="glob on item ids, e.g. 'reducible-*'")
    c.add_argument("--jobs", type=int, default=1, help="worker processes")
    c.add_argument("--dir", default=None, help="run a directory of documents instead of the built-in corpus")

    c = sub.add_parser("prove", parents=[common], help="verify a proposition on its corpus instances")
    c.add_argument("proposition", help="proposition id, or 'list'")
    c.add_argument("--flip-sharp", action="store_true", help="debug: flip the sign of pi# in flattening")

    c = sub.add_parser("bracket", parents=[common], help="print brackets of a document's sections")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--courant", action="store_true")
    g.add_argument("--bialgebroid", action="store_true")
    c.add_argument("file")

    c = sub.add_parser("image", parents=[common], help="pointwise forward or backward image")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--forward", action="store_true")
    g.add_argument("--backward", action="store_true")
    c.add_argument("file")
    c.add_argument("--at", required=True, help="source point, comma separated rationals, e.g. 1/2,3")
    return p


def _options(args) -> Options:
    return Options(seed=args.seed, samples=args.samples, degree_bound=args.degree_bound, flip_sharp=getattr(args, "flip_sharp", False))


def _emit(text: str) -> None:
    sys.stdout.write(text + "\n")


def _bracket(args) -> int:
    doc = load_document(args.file)
    sections = doc.sections
    if not sections:
        L = doc.dirac
        if L is None:
            raise InputError("bracket needs a sections or dirac block")
        sections = list(L.generators)
    pi = None
    if args.bialgebroid:
        pi = doc.poisson if doc.poisson is not None else (doc.dirac.ambient_poisson if doc.dirac else None)
        if pi is None:
            raise InputError("--bialgebroid needs a poisson block")
    out = {}
    for i in range(len(sections)):
        for j in range(i + 1, len(sections)):
            s, t = sections[i], sections[j]
            b = bialgebroid_bracket(s, t, pi) if pi is not None else courant_bracket(s, t)
            out[f"[s{i + 1},s{j + 1}]"] = {"vec": [str(x) for x in b.vec.components()], "form": [str(x) for x in b.form.components()]}
    if args.json:
        _emit(json.dumps({"id": doc.id, "bracket": "bialgebroid" if pi is not None else "courant", "values": out}, sort_keys=True, indent=2))
    else:
        for k, v in out.items():
            _emit(f"{k} = ({', '.join(v['vec'])}) + ({', '.join(v['form'])})")
    return 0


def _point(text: str, dim: int):
    try:
        pt = tuple(Fraction(x.strip()) for x in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"--at: cannot read {text!r} as rationals") from None
    if len(pt) != dim:
        raise InputError(f"--at: expected {dim} coordinates, got {len(pt)}")
    return pt


def _image(args) -> int:
    doc = load_document(args.file)
    problem = doc.map_problem()
    if problem is None:
        raise InputError("image needs a map_problem block")
    pt = _point(args.at, problem.map.source.dim)
    try:
        rows = forward_image_point(problem.source, problem.map, pt) if args.forward else backward_image_point(problem.target, problem.map, pt)
    except PoleError as exc:
        raise InputError(f"--at: {exc}") from None
    kind = "forward" if args.forward else "backward"
    if args.json:
        _emit(json.dumps({"id": doc.id, "image": kind, "at": [str(x) for x in pt], "basis": [[str(x) for x in r] for r in rows]}, sort_keys=True, indent=2))
    else:
        _emit(f"{kind} image at ({', '.join(map(str, pt))}), dimension {len(rows)}:")
        for r in rows:
            _emit("  [" + ", ".join(str(x) for x in r) + "]")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    timing = not args.no_timing
    opts = _options(args)
    try:
        if args.command == "check":
            reports = [run_path(args.file, opts, timing)]
        elif args.command == "corpus":
            reports = run_corpus(args.filter, opts, timing, jobs=args.jobs, directory=args.dir)
            if not reports:
                sys.stderr.write(f"no corpus items match {args.filter!r}\n")
                return INPUT_ERROR
        elif args.command == "prove":
            if args.proposition == "list":
                for k, v in PROPOSITIONS.items():
                    _emit(f"{k:<28}{v['statement']}")
                return 0
            reports = [verify_proposition(args.proposition, opts, timing)]
        elif args.command == "bracket":
            return _bracket(args)
        else:
            return _image(args)
    except (InputError, UnknownProposition) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return INPUT_ERROR
    _emit(render(reports, args.json, single=args.command != "corpus"))
    return exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())
