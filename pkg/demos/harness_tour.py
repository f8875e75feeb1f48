"""Drive the bundled corpus and propositions from Python instead of the CLI.

Run with ``python3 demos/harness_tour.py``.
"""

from dirackit.harness.checks import Options
from dirackit.harness.propositions import PROPOSITIONS, verify_proposition
from dirackit.harness.runner import exit_code, render, run_corpus

opts = Options(seed=1, samples=20)
reports = run_corpus(None, opts, timing=False)
print(render(reports, False))
print("exit code:", exit_code(reports))

for ident in sorted(PROPOSITIONS):
    rep = verify_proposition(ident, opts, timing=False)
    print(f"{ident:<28} {rep.verdict}")

# the sign-flipped bialgebroid identification is a negative control
flipped = verify_proposition("prop-bialgebroid-iso", Options(seed=1, samples=20, flip_sharp=True), timing=False)
print("flipped control:", flipped.verdict, "-", flipped.witness)
