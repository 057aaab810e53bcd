"""
Running the identity suite
==========================

Thirteen pointwise identities are checked on every node of a grid.  Each
one carries a hypothesis (universal, constant angle, Lagrangian, shrinker)
and only points meeting it count towards pass/fail.  A useful suite has to
pass on the Clifford torus and visibly fail on surfaces that are not
shrinkers.
"""

from kahler import calculus, catalog
from kahler.identities import run_suite


def show(spec, n=16):
    report = run_suite(spec, calculus.make_grid(spec, n, n), 1e-8)
    print(f"\n{spec.name}: all pass = {report.all_pass}")
    for ident, r in report.results.items():
        print(f"  {ident.value:18s} {ident.hypothesis.value:24s} "
              f"max {r.max_residual:9.2e}  hypothesis met {r.points_hypothesis_met:4d}"
              f"  {'PASS' if r.passed else 'FAIL'}")


# a shrinker: everything holds to round-off
show(catalog.clifford_torus())

# a product torus is still Lagrangian, so H = J grad(beta) holds, but H != -x_perp
show(catalog.product_torus(2.0, 1.0))

# a generic perturbation breaks every identity that is not universal
show(catalog.perturbed_torus(((1, 1, 1, 0.1, 0.0), (2, 2, 1, 0.08, 0.4))))
