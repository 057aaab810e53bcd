"""Built-in immersions with known ground truth.

Every entry is built by :func:`build`, e.g.::

    build("clifford_torus")
    build("constant_angle_plane", math.pi / 6, math.pi / 6)
    build("product_torus", r=2.0, s=1.0)

Ground-truth source labels: ``published`` (a known result about the
surface), ``closed form`` (hand computation from the parametrisation) and
``definition`` (true by construction).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import expr as _expr
from . import jets
from .errors import ParamError
from .geometry import ImmersionSpec
from .jets import Jet3

TWO_PI = 2.0 * math.pi
_TORUS_DOMAIN = ((0.0, TWO_PI), (0.0, TWO_PI))

#: Default Fourier perturbation: (component, m, n, amplitude, phase) terms
#: added to the radius of the first (component 1) or second circle.
DEFAULT_PERTURBATION = ((1, 0, 1, 0.06, 0.0), (2, 1, 0, 0.04, 0.5))
MAX_PERTURBATION = 0.2


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    summary: str
    params: tuple  # (name, default, documented range)
    domain: str
    periodic: tuple
    ground_truth: tuple  # (quantity, value, source)


CATALOG = {
    "clifford_torus": CatalogEntry(
        "clifford_torus",
        "(e^{iu}, e^{iv}), the Clifford torus S^1(1) x S^1(1)",
        (),
        "[0, 2pi] x [0, 2pi]",
        (True, True),
        (("cos_theta", "0 (Lagrangian)", "published"),
         ("beta", "u + v + pi", "published"),
         ("eta", "exp(i(u + v + pi))", "published"),
         ("|h|^2", "2", "published"),
         ("shrinker", "yes, H = -x", "published"),
         ("|DJ_M|^2", "8", "closed form"),
         ("Maslov winding of u-loop / v-loop", "-1 / -1", "closed form")),
    ),
    "product_torus": CatalogEntry(
        "product_torus",
        "(r e^{iu}, s e^{iv}); a shrinker only for r = s = 1",
        (("r", 1.0, "r > 0"), ("s", 1.0, "s > 0")),
        "[0, 2pi] x [0, 2pi]",
        (True, True),
        (("cos_theta", "0", "closed form"),
         ("|H + x^perp|", "sqrt((r - 1/r)^2 + (s - 1/s)^2)", "closed form"),
         ("gauss_K", "0", "closed form"),
         ("Gaussian area", "4 pi^2 r s exp(-(r^2 + s^2)/2)", "closed form")),
    ),
    "lagrangian_catenoid": CatalogEntry(
        "lagrangian_catenoid",
        "z_k = u_k + i u_k / (u_1^2 + u_2^2) on R^2 minus the origin",
        (("inner", 0.5, "0 < inner < outer"), ("outer", 2.0, "outer > inner")),
        "R^2 \\ {0}, sampled on the annulus inner <= rho <= outer",
        (False, False),
        (("eta", "1", "published"),
         ("beta", "0", "published"),
         ("H", "0 (minimal)", "published"),
         ("cos_theta", "0", "closed form")),
    ),
    "constant_angle_plane": CatalogEntry(
        "constant_angle_plane",
        "z1 = u cos t1 + i v cos t2, z2 = -v sin t2 - i u sin t1",
        (("theta1", math.pi / 6, "any real"), ("theta2", math.pi / 6, "any real")),
        "R^2",
        (False, False),
        (("cos_theta", "cos(theta1 + theta2)", "published"),
         ("beta", "pi when sin(theta1 + theta2) > 0", "published"),
         ("h", "0 (totally geodesic)", "published")),
    ),
    "holomorphic_graph": CatalogEntry(
        "holomorphic_graph",
        "(u + iv, f(u + iv)) for a holomorphic polynomial f = f_re + i f_im",
        (("f_re", "u^2 - v^2", "expression in u, v"),
         ("f_im", "2*u*v", "expression in u, v; Cauchy-Riemann with f_re")),
        "R^2",
        (False, False),
        (("cos_theta", "1 (complex curve)", "definition"),
         ("eta", "0", "definition"),
         ("H", "0", "definition")),
    ),
    "perturbed_torus": CatalogEntry(
        "perturbed_torus",
        "((1 + a) e^{iu}, (1 + b) e^{iv}) with small Fourier radii a, b",
        (("coeffs", DEFAULT_PERTURBATION,
          "terms (component, m, n, amplitude, phase); sum |amplitude| < 0.2"),),
        "[0, 2pi] x [0, 2pi]",
        (True, True),
        (("shrinker", "no (for nonzero amplitudes)", "closed form"),),
    ),
}

ALIASES = {
    "clifford": "clifford_torus",
    "product": "product_torus",
    "catenoid": "lagrangian_catenoid",
    "plane": "constant_angle_plane",
    "holomorphic": "holomorphic_graph",
    "perturbed": "perturbed_torus",
}


# ------------------------------------------------------------------ builders
def clifford_torus():
    def components(u, v):
        return jets.cos(u), jets.sin(u), jets.cos(v), jets.sin(v)

    return ImmersionSpec("clifford_torus", components, _TORUS_DOMAIN, (True, True),
                         catalog_id="clifford_torus")


def product_torus(r=1.0, s=1.0):
    r, s = float(r), float(s)
    if not (r > 0 and s > 0):
        raise ParamError(f"product_torus needs r, s > 0, got r={r}, s={s}")

    def components(u, v):
        return r * jets.cos(u), r * jets.sin(u), s * jets.cos(v), s * jets.sin(v)

    return ImmersionSpec(f"product_torus(r={r:g}, s={s:g})", components, _TORUS_DOMAIN,
                         (True, True), catalog_id="product_torus", params=(r, s))


def lagrangian_catenoid(inner=0.5, outer=2.0):
    inner, outer = float(inner), float(outer)
    if not 0 < inner < outer:
        raise ParamError(f"catenoid annulus needs 0 < inner < outer, got {inner}, {outer}")

    def components(u, v):
        rho2 = u * u + v * v
        if isinstance(rho2, Jet3):
            inv = 1.0 / rho2
        else:
            inv = jets.reciprocal(rho2)
        return u, u * inv, v, v * inv

    return ImmersionSpec("lagrangian_catenoid", components, catalog_id="lagrangian_catenoid",
                         params=(inner, outer), annulus=(inner, outer))


def constant_angle_plane(theta1=math.pi / 6, theta2=math.pi / 6):
    t1, t2 = float(theta1), float(theta2)
    c1, s1, c2, s2 = math.cos(t1), math.sin(t1), math.cos(t2), math.sin(t2)

    def components(u, v):
        return c1 * u, c2 * v, -s2 * v, -s1 * u

    return ImmersionSpec(f"constant_angle_plane({t1:.6g}, {t2:.6g})", components,
                         catalog_id="constant_angle_plane", params=(t1, t2))


def holomorphic_graph(f_re="u^2 - v^2", f_im="2*u*v"):
    re_ast, im_ast = _expr.parse(f_re), _expr.parse(f_im)
    # Cauchy-Riemann at a few fixed points
    probe = (np.array([0.3, -0.7, 1.1]), np.array([0.2, 0.5, -0.9]))
    a = _expr.eval_jet(re_ast, probe, order=1)
    b = _expr.eval_jet(im_ast, probe, order=1)
    cr = np.abs(a.partial(1, 0) - b.partial(0, 1)) + np.abs(a.partial(0, 1) + b.partial(1, 0))
    if np.any(cr > 1e-9 * (1 + np.abs(a.partial(1, 0)) + np.abs(a.partial(0, 1)))):
        raise ParamError("holomorphic_graph: (f_re, f_im) violates the Cauchy-Riemann equations")

    def components(u, v):
        env = {"u": u, "v": v}
        return u, v, _expr.evaluate(re_ast, env), _expr.evaluate(im_ast, env)

    return ImmersionSpec(f"holomorphic_graph({f_re}, {f_im})", components,
                         catalog_id="holomorphic_graph", params=(f_re, f_im),
                         expressions=(None, None, re_ast, im_ast))


def _radius(terms, u, v):
    out = 1.0
    for _, m, n, amp, phase in terms:
        out = out + amp * jets.cos(m * u + n * v + phase)
    return out


def perturbed_torus(coeffs=DEFAULT_PERTURBATION):
    terms = tuple((int(k), int(m), int(n), float(a), float(ph)) for k, m, n, a, ph in coeffs)
    for k, m, n, a, ph in terms:
        if k not in (1, 2):
            raise ParamError(f"perturbation component must be 1 or 2, got {k}")
    total = sum(abs(t[3]) for t in terms)
    if total >= MAX_PERTURBATION:
        raise ParamError(f"perturbation amplitude {total:g} must be < {MAX_PERTURBATION}")
    first = tuple(t for t in terms if t[0] == 1)
    second = tuple(t for t in terms if t[0] == 2)

    def components(u, v):
        cu, su, cv, sv = jets.cos(u), jets.sin(u), jets.cos(v), jets.sin(v)
        if first:
            r1 = _radius(first, u, v)
            cu, su = r1 * cu, r1 * su
        if second:
            r2 = _radius(second, u, v)
            cv, sv = r2 * cv, r2 * sv
        return cu, su, cv, sv

    return ImmersionSpec(f"perturbed_torus({len(terms)} terms, amplitude {total:g})",
                         components, _TORUS_DOMAIN, (True, True),
                         catalog_id="perturbed_torus", params=terms)


_BUILDERS = {
    "clifford_torus": clifford_torus,
    "product_torus": product_torus,
    "lagrangian_catenoid": lagrangian_catenoid,
    "constant_angle_plane": constant_angle_plane,
    "holomorphic_graph": holomorphic_graph,
    "perturbed_torus": perturbed_torus,
}


def build(id, *args, **kwargs):
    """Build the catalog immersion ``id`` (aliases accepted)."""
    key = ALIASES.get(id, id)
    if key not in _BUILDERS:
        raise ParamError(f"unknown catalog entry {id!r}; known: {', '.join(sorted(_BUILDERS))}")
    return _BUILDERS[key](*args, **kwargs)


def spec_from_definition(defn):
    """ImmersionSpec for a parsed :class:`~kahler.expr.SurfaceDefinition`."""
    asts = defn.components

    def components(u, v):
        env = {"u": u, "v": v}
        return tuple(_expr.evaluate(a, env) for a in asts)

    return ImmersionSpec(defn.name, components, defn.domain, defn.periodic,
                         expressions=asts, description="; ".join(defn.texts))


def load(path):
    """ImmersionSpec from a surface definition file."""
    return spec_from_definition(_expr.load_surface(path))
