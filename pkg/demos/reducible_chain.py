"""A reducible Dirac structure on R^3 and its quotient Poisson manifold.

L is spanned by x d/dy + dx, -x d/dx + dy and d/dt.  Its characteristic
distribution is d/dt, and the leaf space (x, y) carries x d/dx^d/dy.

Run with ``python3 demos/reducible_chain.py``.
"""

from dirackit.algebroid import compare_algebroids, cotangent_algebroid, pullback_algebroid
from dirackit.calculus import PolyMap, bivector
from dirackit.courant import section
from dirackit.dirac import (
    DiracSpec,
    Reduction,
    admissible_bracket,
    characteristic_pair,
    check_dirac,
    dirac_to_algebroid,
    graph_of_bivector,
    modular_cocycle_dirac,
    verify_reduction,
)
from dirackit.exact import Chart, parse_expr
from dirackit.maps import DiracMapProblem, check_dirac_map, dirac_map_modular_cocycle

m = Chart(["x", "y", "t"])
n = Chart(["x", "y"])
x = parse_expr("x", m)
proj = PolyMap(m, n, [m.coord(0), m.coord(1)])

L = DiracSpec(
    m,
    [section(m, [0, x, 0], [1, 0, 0]), section(m, [-x, 0, 0], [0, 1, 0]), section(m, [0, 0, 1])],
    reduction=Reduction(n, proj),
    name="L",
)
rep = check_dirac(L, samples=100)
print("Dirac axioms hold:", bool(rep), f"(checked at {rep.samples} points)")

cp = characteristic_pair(L)
print("characteristic distribution:", ", ".join(str(v) for v in cp.distribution.generators))
print("admissible {x, y} =", admissible_bracket(L, parse_expr("x", m), parse_expr("y", m)))
quotient = verify_reduction(L)
print("quotient bivector:", quotient)

# the algebroid of L is the pullback of the quotient cotangent algebroid
P, _ = pullback_algebroid(cotangent_algebroid(bivector(n, [[0, parse_expr("x", n)], [parse_expr("-x", n), 0]])), proj)
print("A_L vs pullback:", compare_algebroids(dirac_to_algebroid(L), P) or "identical")
print("modular cocycle of L:", [str(v) for v in modular_cocycle_dirac(L).values()])

problem = DiracMapProblem(proj, L, graph_of_bivector(quotient), samples=50)
print("projection is b-Dirac:", bool(check_dirac_map(problem, "backward")))
print("projection is f-Dirac:", bool(check_dirac_map(problem, "forward")))
xi, verdict, _ = dirac_map_modular_cocycle(problem)
print("mod of the projection:", xi or 0, verdict)
