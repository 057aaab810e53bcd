"""
Surfaces from text files
========================

Any immersion can be written as four expressions in u and v.  The file
surfaces/clifford.surf spells out the Clifford torus; here it is loaded,
checked against the built-in entry, and a new surface is defined inline.
"""

from pathlib import Path

import numpy as np

from kahler import catalog, expr
from kahler.analysis import surface_data
from kahler.errors import ParseError
from kahler.identities import run_suite
from kahler.calculus import make_grid

here = Path(__file__).parent
text_torus = catalog.load(here / "surfaces" / "clifford.surf")

u, v, _ = make_grid(text_torus, 8, 8).points()
a, b = surface_data(text_torus, (u, v)), surface_data(catalog.clifford_torus(), (u, v))
diff = max(np.nanmax(np.abs(a.scalars()[k] - b.scalars()[k])) for k in a.scalars())
print("file vs built-in, max difference over all quantities:", diff)

# A wobbling torus: the second circle breathes as we go around the first one.
# It is not Lagrangian, so cos(theta) varies and only the universal identities
# have points where their hypothesis holds.
wobbly = catalog.spec_from_definition(expr.parse_surface("""
name = wobbling torus
x1 = cos(u)
y1 = sin(u)
x2 = (1 + 0.2*sin(u)) * cos(v)
y2 = (1 + 0.2*sin(u)) * sin(v)
domain_u = 0, 2*pi
domain_v = 0, 2*pi
periodic_u = true
periodic_v = true
"""))
d = surface_data(wobbly, make_grid(wobbly, 16, 16).points()[:2])
print("wobbling torus cos(theta) range:", d.cos_theta.min(), d.cos_theta.max())
report = run_suite(wobbly, make_grid(wobbly, 16, 16))
for ident, r in report.results.items():
    print(f"  {ident.value:18s} max residual {r.max_residual:9.2e}  "
          f"hypothesis met at {r.points_hypothesis_met:3d} of 256 points")

# Errors point at the offending line and column.
try:
    expr.parse_surface("x1 = cos(u) + 2u\ny1 = 0\nx2 = 0\ny2 = v\n"
                       "domain_u = 0, 1\ndomain_v = 0, 1\n")
except ParseError as exc:
    print("ParseError:", exc)
