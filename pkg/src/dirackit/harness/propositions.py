"""Proposition verifiers: each id runs a fixed list of checks on designated corpus items.

Every listed check must PASS, regardless of what the item itself expects.
"""

from __future__ import annotations

import time

from .checks import ERROR, FAIL, PASS, CheckResult, Options, run_check
from .document import InputError
from .runner import ItemReport, corpus_document

__all__ = ["PROPOSITIONS", "verify_proposition", "UnknownProposition"]


class UnknownProposition(ValueError):
    pass


PROPOSITIONS: dict[str, dict] = {
    "prop-pullback-cocycle": {
        "statement": "the pullback morphism along a submersion has vanishing modular cocycle for compatible choices",
        "instances": [("reducible-r3", ["pullback_cocycle"]), ("pullback-nonlinear-r3", ["pullback_cocycle"])],
    },
    "prop-reducible-iso": {
        "statement": "a reducible Dirac structure is isomorphic to the pullback of the quotient cotangent algebroid",
        "instances": [("reducible-r3", ["reduction", "pullback_algebroid"]), ("reducible-rescaled-r3", ["reduction", "pullback_algebroid"])],
    },
    "lemma-cartan": {
        "statement": "fg p^*[a,b] = g L_X(p^*b) - f L_Y(p^*a) + d<f p^*a, Y>",
        "instances": [("reducible-r3", ["lemma"])],
    },
    "prop-char-mod-zero": {
        "statement": "the characteristic distribution of a reducible structure has vanishing modular class",
        "instances": [("reducible-r3", ["char_mod_zero"]), ("bdirac-submersion-r4", ["char_mod_zero"])],
    },
    "prop-mod-pullback": {
        "statement": "mod L is the pullback of the modular class of the quotient Poisson manifold",
        "instances": [
            ("reducible-r3", ["mod_pullback"]),
            ("reducible-rescaled-r3", ["mod_pullback"]),
            ("bdirac-submersion-r4", ["mod_pullback"]),
        ],
    },
    "prop-bialgebroid-iso": {
        "statement": "a Dirac structure of the bialgebroid of pi flattens to an ordinary Dirac structure with the same algebroid",
        "instances": [("bialgebroid-tstar-x", ["bialgebroid_flatten"]), ("bialgebroid-tm-x", ["bialgebroid_flatten"])],
    },
    "prop-bdirac-quotient": {
        "statement": "a b-Dirac map between reducible structures induces a b-Dirac map of the quotient Poisson graphs",
        "instances": [("bdirac-submersion-r4", ["bdirac_quotient"])],
    },
    "prop-fdirac-quotient": {
        "statement": "an f-Dirac map between reducible structures induces a Poisson map of the quotients",
        "instances": [("fdirac-quotient", ["fdirac_quotient"])],
    },
    "prop-immersion-comorphism": {
        "statement": "an f-Dirac immersion is b-Dirac and defines a comorphism",
        "instances": [("fdirac-immersion", ["immersion_comorphism"])],
    },
    "prop-submersion-pullback": {
        "statement": "the backward image along a submersion is the pullback algebroid",
        "instances": [
            ("bdirac-submersion-r4", ["dirac_backward", "pullback_algebroid"]),
            ("reducible-r3", ["dirac_backward", "pullback_algebroid"]),
        ],
    },
    "prop-relation-algebroid": {
        "statement": "R is a Lie algebroid and both projections are morphisms",
        "instances": [
            ("poisson-map-projection", ["relation_algebroid"]),
            ("poisson-dirac-inclusion", ["relation_algebroid"]),
            ("reducible-r3", ["relation_algebroid"]),
            ("fdirac-immersion", ["relation_algebroid"]),
            ("presymplectic-inclusion", ["relation_algebroid"]),
        ],
    },
    "prop-modphi-zero": {
        "statement": "a b-Dirac submersion has vanishing modular class",
        "instances": [
            ("reducible-r3", ["mod_phi_zero", "mod_phi_rescaled"]),
            ("reducible-rescaled-r3", ["mod_phi_zero", "mod_phi_rescaled"]),
            ("bdirac-submersion-r4", ["mod_phi_zero", "mod_phi_rescaled"]),
        ],
    },
}


def verify_proposition(ident: str, opts: Options | None = None, timing: bool = True, directory=None) -> ItemReport:
    if ident not in PROPOSITIONS:
        raise UnknownProposition(f"unknown proposition {ident!r}; known: {', '.join(sorted(PROPOSITIONS))}")
    opts = opts or Options()
    start = time.perf_counter()
    entries = []
    witness = None
    verdict = PASS
    for item, names in PROPOSITIONS[ident]["instances"]:
        try:
            doc = corpus_document(item, directory)
        except (InputError, KeyError) as exc:
            doc, err = None, CheckResult(ERROR, None, f"input error: {exc}")
        for name in names:
            if doc is None:
                res = err
            else:
                try:
                    res = run_check(name, doc, opts)
                except (ValueError, ArithmeticError) as exc:
                    res = CheckResult(ERROR, None, f"{type(exc).__name__}: {exc}")
            entries.append({"name": f"{item}:{name}", "expected": PASS, "outcome": res.verdict, **res.to_json()})
            if res.verdict != PASS:
                if witness is None:
                    witness = f"{item}:{name}: {res.witness}"
                if verdict != ERROR:
                    verdict = ERROR if res.verdict == ERROR else (FAIL if res.verdict == FAIL or verdict == FAIL else res.verdict)
    millis = round((time.perf_counter() - start) * 1000) if timing else None
    seed = opts.seed if opts.seed is not None else 0
    return ItemReport(ident, verdict, seed, millis, entries, witness)
