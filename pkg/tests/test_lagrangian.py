import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import catalog_specs, sample_points
from kahler import catalog, lagrangian
from kahler.errors import ParamError, UndefinedAngleError
from kahler.lagrangian import EtaValue, LoopSpec, maslov_index, parse_loop



def eta_oracle(spec, u, v):
    """``dz1 ^ dz2 (x_u, x_v) / sqrt(det g)`` with complex arithmetic."""
    xu, xv = oracles.first_derivs(spec, u, v)
    zu = xu[[0, 2]] + 1j * xu[[1, 3]]
    zv = xv[[0, 2]] + 1j * xv[[1, 3]]
    return (zu[0] * zv[1] - zu[1] * zv[0]) / math.sqrt(np.linalg.det(oracles.metric(spec, u, v)))


def test_clifford_eta_and_beta():
    spec = catalog.clifford_torus()
    u, v = np.array([0.0, 0.3, 2.0]), np.array([0.0, 1.1, 2.5])
    val = lagrangian.eta_at(spec, (u, v))
    assert np.allclose(val.re + 1j * val.im, np.exp(1j * (u + v + math.pi)), atol=1e-15)
    beta = lagrangian.principal_beta(spec, (u, v))
    assert beta[0] == pytest.approx(math.pi, abs=1e-15)
    assert np.allclose(np.exp(1j * beta), np.exp(1j * (u + v + math.pi)))


@pytest.mark.parametrize("name", [n for n in catalog_specs() if n != "holomorphic_graph"])
def test_eta_against_complex_oracle(name, rng):
    spec = catalog_specs()[name]
    for u, v in zip(*sample_points(spec, 5, rng)):
        val = lagrangian.eta_at(spec, (u, v))
        assert abs(val.re + 1j * val.im - eta_oracle(spec, u, v)) < 1e-8
        # |eta| = sin(theta)
        cos = oracles.cos_theta(spec, u, v)
        assert abs(val.modulus - math.sqrt(1 - cos**2)) < 1e-8


def test_principal_value_range():
    val = EtaValue(np.array([-1.0, -1.0, 1.0]), np.array([0.0, -0.0, 0.0]))
    beta = lagrangian.lagrangian_angle(val)
    assert beta.tolist() == [math.pi, math.pi, 0.0]
    assert np.all(lagrangian.EtaValue(np.array([0.0]), np.array([1.0])).theta_from_eta
                  == math.pi / 2)


def test_complex_points_have_no_angle():
    spec = catalog.holomorphic_graph()
    with pytest.raises(UndefinedAngleError):
        lagrangian.principal_beta(spec, (0.1, 0.2))
    with pytest.raises(UndefinedAngleError):
        lagrangian.maslov_at(spec, (0.1, 0.2))


def test_maslov_form_is_minus_d_beta(rng):
    spec = catalog.perturbed_torus()
    u, v = sample_points(spec, 6, rng)
    sample = lagrangian.maslov_at(spec, (u, v))
    h = 1e-6
    for k in range(u.size):
        def beta(a, b):
            return float(np.angle(np.exp(1j * lagrangian.principal_beta(spec, (a, b)))))
        b0 = beta(u[k], v[k])
        du = np.angle(np.exp(1j * (beta(u[k] + h, v[k]) - b0))) / h
        dv = np.angle(np.exp(1j * (beta(u[k], v[k] + h) - b0))) / h
        assert abs(sample.alpha_u[k] + du) < 1e-5
        assert abs(sample.alpha_v[k] + dv) < 1e-5


def test_maslov_form_is_closed(rng):
    spec = catalog.perturbed_torus()
    u, v = sample_points(spec, 20, rng)
    assert np.max(lagrangian.closedness_residual(spec, (u, v))) < 1e-10


@pytest.mark.parametrize("text, winding", [
    ("u-loop", -1), ("v-loop", -1), ("u-loop@0.5", -1),
    ("circle:1,1,0.5", 0), ("2*pi*t; 4*pi*t", -3), ("-2*pi*t; 0", 1),
])
def test_clifford_windings(text, winding):
    spec = catalog.clifford_torus()
    res = maslov_index(spec, parse_loop(text, spec))
    assert res.winding == winding
    assert abs(res.raw - winding) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_winding_is_additive_on_perturbed_torus(m, n):
    spec = catalog.perturbed_torus()

    def curve(t):
        return 2 * math.pi * m * t + 0.3, 2 * math.pi * n * t + 0.1

    res = maslov_index(spec, LoopSpec(curve, 64, f"({m},{n})"))
    assert res.winding == -(m + n)
    assert abs(res.raw - res.winding) < 1e-9


def test_catenoid_loop_has_no_winding():
    spec = catalog.lagrangian_catenoid()
    res = maslov_index(spec, parse_loop("circle:0,0,1", spec))
    assert res.winding == 0 and abs(res.raw) < 1e-12


def test_loop_errors():
    spec = catalog.clifford_torus()
    with pytest.raises(ParamError):
        maslov_index(spec, parse_loop("t; 0.5*t", spec))
    with pytest.raises(ParamError):
        parse_loop("u-loop", catalog.constant_angle_plane())
    with pytest.raises(ParamError):
        parse_loop("spiral", spec)
    with pytest.raises(ParamError):
        LoopSpec(lambda t: (t, t), samples=8)


def test_refinement_handles_fast_phase():
    spec = catalog.clifford_torus()
    res = maslov_index(spec, LoopSpec(lambda t: (2 * math.pi * 20 * t, 0 * t), 16, "fast"))
    assert res.winding == -20 and res.samples > 16


@pytest.mark.parametrize("name", list(catalog_specs()))
def test_eta_norm_on_every_surface(name, rng):
    spec = catalog_specs()[name]
    p = sample_points(spec, 100, rng)
    val = lagrangian.eta_at(spec, p)
    from kahler.geometry import LocalGeometry
    cos = LocalGeometry(spec, p, order=1).cos_theta.value
    assert np.max(np.abs(val.modulus**2 + cos**2 - 1)) < 1e-9


def test_maslov_index_is_parametrization_invariant():
    spec = catalog.perturbed_torus()
    plain = LoopSpec(lambda t: (2 * math.pi * t, 0.4 + 0 * t), 64, "plain")
    # monotone reparametrization t -> t + 0.1 sin(2 pi t) / (2 pi)
    warped = LoopSpec(lambda t: (2 * math.pi * t + 0.1 * np.sin(2 * math.pi * t), 0.4 + 0 * t),
                      64, "warped")
    a, b = maslov_index(spec, plain), maslov_index(spec, warped)
    c = maslov_index(spec, LoopSpec(plain.curve, 128, "doubled"))
    assert a.winding == b.winding == c.winding == -1
    assert abs(a.raw - b.raw) < 1e-12 and abs(a.raw - c.raw) < 1e-12


def test_closedness_where_eta_is_large(rng):
    spec = catalog.perturbed_torus(((1, 1, 1, 0.1, 0.0), (2, 2, 1, 0.08, 0.4)))
    u, v = sample_points(spec, 100, rng)
    keep = lagrangian.eta_at(spec, (u, v)).modulus > 0.1
    assert np.max(lagrangian.closedness_residual(spec, (u[keep], v[keep]))) < 1e-6
