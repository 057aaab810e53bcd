"""Acceptance criteria 1-10.

Each criterion records one PASS/FAIL line; the lines are printed as the
checks run and again, collected, in the terminal summary.
"""

import io
import json
import math
import time

import numpy as np
import pytest

from conftest import DATA, catalog_specs, sample_points
from kahler import calculus, catalog, cli, expr, lagrangian, shrinker
from kahler.analysis import surface_data
from kahler.errors import ParseError
from kahler.geometry import immersion_jets
from kahler.identities import Hypothesis, IdentityId, run_suite
from kahler.jets import INDICES, fd_oracle

TITLES = {
    1: "Clifford torus goldens",
    2: "Maslov windings on the Clifford torus",
    3: "Lagrangian catenoid",
    4: "constant-angle plane",
    5: "identity suite (Clifford, product torus)",
    6: "weighted integrals vanish / Green identity",
    7: "Gaussian area of the Clifford torus",
    8: "optimizer on the product-torus family",
    9: "jet vs fd_oracle on every catalog surface",
    10: "surface file parser",
}
RESULTS = {}


def record(n, ok, detail):
    RESULTS.setdefault(n, []).append((bool(ok), detail))
    print(f"criterion {n:2d} [{'PASS' if ok else 'FAIL'}] {TITLES[n]}: {detail}")
    return ok


def summary_lines():
    lines = []
    for n in sorted(RESULTS):
        parts = RESULTS[n]
        ok = all(p[0] for p in parts)
        detail = "; ".join(p[1] for p in parts)
        lines.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {TITLES[n]}: {detail}")
    return lines


def clifford_grid_points(n=32):
    spec = catalog.clifford_torus()
    u, v, _ = calculus.make_grid(spec, n, n).points()
    return spec, u.ravel(), v.ravel()


# ------------------------------------------------------------------ 1
def test_criterion_01_clifford_goldens():
    t0 = time.perf_counter()
    spec, u, v = clifford_grid_points()
    d = surface_data(spec, (u, v))
    cos = np.max(np.abs(d.cos_theta))
    hsq = np.max(np.abs(d.norm_h_sq - 2))
    shr = np.max(d.shrinker_residual)
    beta0 = float(lagrangian.principal_beta(spec, (0.0, 0.0)))
    dbar = np.max(np.abs(d.dbarJM_sq - 8))
    morvan = run_suite(spec, (u, v))[IdentityId.MORVAN_GENERAL]
    elapsed = time.perf_counter() - t0
    ok = (cos < 1e-12 and hsq < 1e-10 and shr < 1e-10 and abs(beta0 - math.pi) < 1e-12
          and dbar < 1e-9 and morvan.points_hypothesis_met == u.size
          and morvan.max_residual < 1e-9 and elapsed < 2.0)
    record(1, ok, f"|cos|={cos:.1e} ||h|^2-2|={hsq:.1e} shrinker={shr:.1e} "
                  f"beta(0,0)-pi={beta0 - math.pi:.1e} |DJ|^2-8={dbar:.1e} "
                  f"MORVAN_GENERAL={morvan.max_residual:.1e} time={elapsed:.2f}s")
    assert ok


# ------------------------------------------------------------------ 2
def test_criterion_02_maslov_windings():
    spec = catalog.clifford_torus()
    out = {}
    for text in ("u-loop", "v-loop", "circle:2,3,0.7"):
        out[text] = lagrangian.maslov_index(spec, lagrangian.parse_loop(text, spec))
    ok = (out["u-loop"].winding == -1 and abs(out["u-loop"].raw + 1) < 1e-6
          and out["v-loop"].winding == -1 and abs(out["v-loop"].raw + 1) < 1e-6
          and out["circle:2,3,0.7"].winding == 0)
    record(2, ok, ", ".join(f"{k}: {r.winding} (raw {r.raw:+.9f})" for k, r in out.items()))
    assert ok


# ------------------------------------------------------------------ 3
def test_criterion_03_catenoid():
    spec = catalog.lagrangian_catenoid(0.5, 2.0)
    u, v, _ = calculus.make_grid(spec, 64, 64).points()
    u, v = u.ravel(), v.ravel()
    d = surface_data(spec, (u, v))
    eta = np.max(np.abs(d.eta_re + 1j * d.eta_im - 1))
    H = np.max(np.sqrt((d.H_ambient**2).sum(0)))
    morvan = run_suite(spec, (u, v))[IdentityId.MORVAN_LAGRANGIAN]
    ok = (eta < 1e-9 and H < 1e-7 and morvan.points_hypothesis_met == u.size
          and morvan.max_residual < 1e-7)
    record(3, ok, f"|eta-1|={eta:.1e} |H|={H:.1e} MORVAN_LAGRANGIAN={morvan.max_residual:.1e}")
    assert ok


# ------------------------------------------------------------------ 4
def test_criterion_04_constant_angle_plane(rng):
    spec = catalog.constant_angle_plane(math.pi / 6, math.pi / 6)
    u, v = rng.uniform(-5, 5, 200), rng.uniform(-5, 5, 200)
    d = surface_data(spec, (u, v))
    cos = np.max(np.abs(d.cos_theta - 0.5))
    h = np.max(np.abs(d.h))
    beta = np.max(np.abs(d.beta - math.pi))
    ok = cos < 1e-12 and h < 1e-12 and beta < 1e-12
    record(4, ok, f"|cos-0.5|={cos:.1e} |h|={h:.1e} |beta-pi|={beta:.1e}")
    assert ok


# ------------------------------------------------------------------ 5
def test_criterion_05_identity_suite():
    clifford = catalog.clifford_torus()
    rep = run_suite(clifford, calculus.make_grid(clifford, 32, 32), 1e-8)
    product = catalog.product_torus(2.0, 1.0)
    prep = run_suite(product, calculus.make_grid(product, 32, 32), 1e-8)
    universal = [i for i in IdentityId if i.hypothesis is Hypothesis.UNIVERSAL]
    gated = [i for i in IdentityId
             if i.hypothesis in (Hypothesis.SHRINKER, Hypothesis.CONSTANT_THETA_SHRINKER)]
    shr = prep[IdentityId.SHRINKER_DEF].max_residual
    ok = (rep.all_pass and len(rep.results) == 13
          and all(prep[i].passed for i in universal)
          and abs(shr - 1.5) < 1e-9
          and all(prep[i].points_hypothesis_met == 0 for i in gated))
    worst = max(r.max_residual for r in rep.results.values())
    record(5, ok, f"Clifford 13/13 pass (max residual {worst:.1e}); product(2,1) universal "
                  f"{sum(prep[i].passed for i in universal)}/{len(universal)} pass, "
                  f"SHRINKER_DEF={shr:.12f}, shrinker-gated hypothesis_met="
                  f"{sum(prep[i].points_hypothesis_met for i in gated)}")
    assert ok


# ------------------------------------------------------------------ 6
def test_criterion_06_weighted_integrals():
    clifford = catalog.clifford_torus()
    lcos = calculus.weighted_integral(clifford, "drift:cos_theta",
                                      calculus.make_grid(clifford, 64, 64))
    spec = catalog.perturbed_torus(((1, 1, 1, 0.1, 0.0),))
    grid = calculus.make_grid(spec, 96, 96)
    stokes = max(calculus.stokes_residual(spec, a, b, grid)
                 for a, b in (("cos_theta", "abs_x_sq"), ("sin(u)", "cos(u+v)"),
                              ("abs_x_sq", "cos_theta")))
    ok = abs(lcos) < 1e-10 and stokes < 1e-7
    record(6, ok, f"|int L cos|={abs(lcos):.1e} stokes_residual={stokes:.1e}")
    assert ok


# ------------------------------------------------------------------ 7
def test_criterion_07_gaussian_area():
    spec = catalog.clifford_torus()
    F = calculus.weighted_integral(spec, "1", calculus.make_grid(spec, 64, 64))
    exact = 4 * math.pi**2 * math.exp(-1)
    ok = abs(F - exact) < 1e-8 and abs(exact - 14.5233) < 1e-4
    record(7, ok, f"F={F:.15f} closed form={exact:.15f} diff={abs(F - exact):.1e}")
    assert ok


# ------------------------------------------------------------------ 8
def test_criterion_08_optimizer():
    fam = shrinker.product_family()
    t0 = time.perf_counter()
    res = shrinker.find_critical(fam, (1.5, 0.7))
    elapsed = time.perf_counter() - t0
    fv = [shrinker.first_variation_residual(fam, (1.5, 0.7), d) for d in np.eye(2)]
    err = float(np.max(np.abs(res.params - 1)))
    ok = (res.converged and err < 1e-4 and res.iterations <= 200 and elapsed < 30
          and max(fv) < 1e-5)
    record(8, ok, f"params={np.round(res.params, 8).tolist()} iterations={res.iterations} "
                  f"time={elapsed:.1f}s first_variation={max(fv):.1e}")
    assert ok


# ------------------------------------------------------------------ 9
FD_TOL = 1e-5


@pytest.mark.parametrize("name", [
    "clifford_torus", "product_torus", "constant_angle_plane", "holomorphic_graph",
    "perturbed_torus",
    pytest.param("lagrangian_catenoid", marks=pytest.mark.xfail(
        strict=True, reason="third-order central differences with the documented steps "
                            "carry ~2.5e-4 truncation error near the inner radius; see "
                            "test_catenoid_jets_match_closed_form for the exact check")),
])
def test_criterion_09_jet_vs_fd(name):
    spec = catalog_specs()[name]
    rng = np.random.default_rng(9)
    u, v = sample_points(spec, 100, rng)
    X = immersion_jets(spec, (u, v), 3)
    worst, where = 0.0, None
    for k in range(u.size):
        for ab in INDICES[1:]:
            jet = X.partial(*ab)[:, k]
            for c in range(4):
                fd = fd_oracle(lambda s, t: float(spec.point((s, t))[c]), (u[k], v[k]), ab)
                rel = abs(jet[c] - fd) / max(1.0, abs(jet[c]))
                if rel > worst:
                    worst, where = rel, (ab, c)
    ok = worst < FD_TOL
    record(9, ok, f"{name} max rel {worst:.1e}" + ("" if ok else f" at d{where[0]} of x{where[1]}"))
    assert ok


def test_catenoid_jets_match_closed_form():
    """``u/rho^2 = Re(1/z)`` and ``v/rho^2 = -Im(1/z)``, so every partial is exact."""
    spec = catalog.lagrangian_catenoid()
    u, v = sample_points(spec, 100, np.random.default_rng(9))
    X = immersion_jets(spec, (u, v), 3)
    z = u + 1j * v
    for a, b in INDICES[1:]:
        n = a + b
        d = (1j) ** b * (-1) ** n * math.factorial(n) / z ** (n + 1)
        np.testing.assert_allclose(X.partial(a, b)[1], d.real, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(X.partial(a, b)[3], -d.imag, rtol=1e-12, atol=1e-12)


# ------------------------------------------------------------------ 10
def _cli(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), buf)
    return code, json.loads(buf.getvalue())


def _max_diff(a, b):
    if isinstance(a, dict):
        assert a.keys() == b.keys()
        return max((_max_diff(a[k], b[k]) for k in a), default=0.0)
    if isinstance(a, list):
        assert len(a) == len(b)
        return max((_max_diff(x, y) for x, y in zip(a, b)), default=0.0)
    if isinstance(a, (int, float)) and not isinstance(a, bool):
        return abs(a - b)
    assert a == b
    return 0.0


MALFORMED = {"bad_token.surf": (2, 13), "unclosed_paren.surf": (3, 11), "bad_bound.surf": (6, 17)}


def test_criterion_10_parser():
    path = str(DATA / "clifford.surf")
    diffs = []
    for extra in (("--grid", "32x32"), ("--at", "0,0"), ("--at", "1.3,4.1")):
        c1, file_rep = _cli("analyze", "--surface", path, *extra)
        c2, builtin = _cli("analyze", "--surface", "clifford", *extra)
        assert c1 == c2 == 0
        diffs.append(_max_diff(file_rep["payload"], builtin["payload"]))
    offsets = {}
    for name, want in MALFORMED.items():
        try:
            expr.load_surface(DATA / name)
            offsets[name] = None
        except ParseError as exc:
            offsets[name] = (exc.line, exc.offset)
    ok = max(diffs) < 1e-12 and offsets == MALFORMED
    record(10, ok, f"file vs built-in max diff {max(diffs):.1e}; malformed offsets "
                   + ", ".join(f"{k}->{v}" for k, v in offsets.items()))
    assert ok
