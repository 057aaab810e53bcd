import math
from pathlib import Path

import numpy as np
import pytest

from kahler import catalog

DATA = Path(__file__).parent / "data"


def catalog_specs():
    """One instance of every catalog entry, with non-trivial parameters."""
    return {
        "clifford_torus": catalog.clifford_torus(),
        "product_torus": catalog.product_torus(2.0, 1.0),
        "lagrangian_catenoid": catalog.lagrangian_catenoid(),
        "constant_angle_plane": catalog.constant_angle_plane(math.pi / 6, math.pi / 6),
        "holomorphic_graph": catalog.holomorphic_graph("u^3 - 3*u*v^2", "3*u^2*v - v^3"),
        "perturbed_torus": catalog.perturbed_torus(),
    }


def sample_points(spec, n, rng):
    """``n`` random points inside the sampling region of ``spec``."""
    if spec.annulus is not None:
        inner, outer = spec.annulus
        rho = rng.uniform(inner, outer, n)
        phi = rng.uniform(0, 2 * math.pi, n)
        return rho * np.cos(phi), rho * np.sin(phi)
    (u0, u1), (v0, v1) = spec.domain
    u0, u1 = max(u0, -2.0), min(u1, 2.0)
    v0, v1 = max(v0, -2.0), min(v1, 2.0)
    return rng.uniform(u0, u1, n), rng.uniform(v0, v1, n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
