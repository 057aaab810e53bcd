import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kahler import catalog, geometry, shrinker
from kahler.calculus import make_grid
from kahler.errors import NonConvergenceError, ParamError, UnsupportedDomainError
from kahler.shrinker import OptimizerConfig, find_critical


def F_product(r, s):
    return 4 * math.pi**2 * r * s * math.exp(-(r * r + s * s) / 2)


def grad_product(r, s):
    f = F_product(r, s)
    return np.array([f * (1 / r - r), f * (1 / s - s)])


def test_shrinker_residual_closed_form():
    R, norm = shrinker.shrinker_residual(catalog.product_torus(2.0, 1.0), (0.3, 1.0))
    assert norm == pytest.approx(1.5, abs=1e-12)
    _, norm = shrinker.shrinker_residual(catalog.clifford_torus(), (0.3, 1.0))
    assert norm < 1e-14


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 2.5), st.floats(0.3, 2.5))
def test_family_gradient_closed_form(r, s):
    fam = shrinker.product_family()
    grid = make_grid(fam.build((r, s)), 32, 32)
    assert shrinker.gaussian_area(fam, (r, s), grid) == pytest.approx(F_product(r, s), rel=1e-12)
    g = shrinker.family_gradient(fam, (r, s), grid)
    assert np.allclose(g, grad_product(r, s), atol=1e-8)


@pytest.mark.parametrize("family, params", [
    ("product", (1.5, 0.7)), ("product", (0.8, 1.9)), ("fourier", (0.05, -0.03)),
])
def test_first_variation(family, params):
    fam = shrinker.get_family(family)
    for k in range(fam.dim):
        d = np.eye(fam.dim)[k]
        assert shrinker.first_variation_residual(fam, params, d) < 1e-7


def test_gaussian_area_is_reparametrization_invariant():
    spec = catalog.perturbed_torus()
    shifted = geometry.reparametrized(spec, lambda u, v: (u + 0.7, v - 1.3))
    a = shrinker.gaussian_area_spec(spec)
    b = shrinker.gaussian_area_spec(shifted)
    assert abs(a - b) < 1e-12


def test_product_family_converges():
    res = find_critical(shrinker.product_family(), (1.5, 0.7))
    assert res.converged and res.iterations <= 200
    assert np.allclose(res.params, [1, 1], atol=1e-4)
    assert res.objective == pytest.approx(F_product(1, 1), rel=1e-10)
    assert {t["phase"] for t in res.trace} == {"stationary"}


def test_start_at_critical_point():
    res = find_critical(shrinker.product_family(), (1.0, 1.0))
    assert res.converged and res.iterations == 0


def test_scaling_family_needs_ascent():
    fam = shrinker.scaling_family()
    res = find_critical(fam, (0.6,), OptimizerConfig(mode="ascent"))
    assert res.converged and abs(res.params[0] - 1) < 1e-4
    assert res.trace[0]["phase"] == "ascent"
    best, _ = shrinker.critical_radius_scan(fam, 0.5, 1.5, n=201)
    assert abs(best - 1.0) < 1e-2


def test_fourier_family_zero_amplitudes_are_critical():
    fam = shrinker.fourier_family()
    g = shrinker.family_gradient(fam, (0.0, 0.0), (32, 32))
    assert np.max(np.abs(g)) < 1e-9


def test_strict_mode_raises_with_result():
    cfg = OptimizerConfig(max_iter=2)
    with pytest.raises(NonConvergenceError) as info:
        find_critical(shrinker.product_family(), (2.0, 0.5), cfg, strict=True)
    assert info.value.result.iterations == 2


def test_family_and_config_validation():
    fam = shrinker.product_family()
    with pytest.raises(ParamError):
        fam.check((1.0,))
    with pytest.raises(ParamError):
        fam.build((0.0, 1.0))
    with pytest.raises(ParamError):
        shrinker.get_family("sphere")
    with pytest.raises(ParamError):
        OptimizerConfig(shrink=1.5)
    with pytest.raises(ParamError):
        OptimizerConfig(mode="newton")
    with pytest.raises(ParamError):
        shrinker.fourier_family(bound=0.15)
    plane = shrinker.FamilySpec("planes", catalog.constant_angle_plane, (0, 0), (1, 1), (0, 0))
    with pytest.raises(UnsupportedDomainError):
        plane.build((0.1, 0.2))


def test_converged_result_is_pointwise_shrinker():
    cfg = OptimizerConfig()
    res = find_critical(shrinker.product_family(), (1.5, 0.7), cfg)
    spec = shrinker.product_family().build(res.params)
    u, v, _ = make_grid(spec, 32, 32).points()
    _, norm = shrinker.shrinker_residual(spec, (u, v))
    assert np.max(norm) < 10 * cfg.tol
    stationary = [t["grad_norm_sq"] for t in res.trace if t["phase"] == "stationary"]
    assert all(b <= a for a, b in zip(stationary, stationary[1:]))


def test_area_invariant_under_torus_diffeomorphism():
    spec = catalog.perturbed_torus()
    bent = geometry.reparametrized(
        spec, lambda u, v: (u + 0.3 * geometry.jets.sin(v), v + 0.2 * geometry.jets.cos(u)))
    assert abs(shrinker.gaussian_area_spec(spec) - shrinker.gaussian_area_spec(bent)) < 1e-9
