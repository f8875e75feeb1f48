"""Poisson bivectors on the plane and in three dimensions, and their modular data.

Run with ``python3 demos/poisson_modular.py``.
"""

from dirackit.algebroid import cotangent_algebroid, exactness_test, modular_cocycle
from dirackit.calculus import bivector, modular_vector_field, schouten_bracket
from dirackit.exact import Chart, parse_expr

xy = Chart(["x", "y"])
xyz = Chart(["x", "y", "z"])


def show(title, value):
    print(f"{title:<44} {value}")


pi = bivector(xy, [[0, parse_expr("x", xy)], [parse_expr("-x", xy), 0]])
show("pi", pi)
show("[pi,pi]", schouten_bracket(pi, pi) or 0)
show("modular vector field", modular_vector_field(pi))

# the cotangent algebroid sees twice the modular vector field
xi = modular_cocycle(cotangent_algebroid(pi))
show("modular cocycle of T*M", [str(v) for v in xi.values()])
show("exactness of that cocycle", exactness_test(cotangent_algebroid(pi), xi))

so3 = bivector(xyz, [[0, parse_expr("z", xyz), parse_expr("-y", xyz)],
                     [parse_expr("-z", xyz), 0, parse_expr("x", xyz)],
                     [parse_expr("y", xyz), parse_expr("-x", xyz), 0]])
show("so(3)* bivector, [pi,pi]", schouten_bracket(so3, so3) or 0)
show("so(3)* modular vector field", modular_vector_field(so3) or 0)

bad = bivector(xyz, [[0, 1, 0], [-1, 0, parse_expr("y", xyz)], [0, parse_expr("-y", xyz), 0]])
show("d/dx^d/dy + y d/dy^d/dz, [pi,pi]", schouten_bracket(bad, bad))
