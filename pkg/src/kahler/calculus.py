"""Intrinsic operators on the surface and Gaussian-weighted quadrature.

Scalar fields are named by a string: ``cos_theta``, ``cos2_theta``,
``theta``, ``abs_x_sq``, or any expression in ``u`` and ``v`` (parsed by
:mod:`kahler.expr`).  Integrands additionally accept ``drift:<field>``,
``laplace:<field>`` and ``grad_sq:<field>``.

Everything is vectorised: ``p`` may be a single point or a pair of arrays.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import expr as _expr
from . import jets
from .errors import NearComplexError, UnsupportedDomainError
from .geometry import EPS_ADAPT, LocalGeometry, dot, require_adapted
from .jets import Jet3

FIELD_NAMES = ("cos_theta", "cos2_theta", "theta", "abs_x_sq")
DEFAULT_NODES = 64
DEFAULT_TRUNCATE_RADIUS = 8.0


# ------------------------------------------------------------------ fields
def resolve_field(fid):
    """Canonical field id: a known name or a parsed expression."""
    if isinstance(fid, _expr.ExprAst):
        return fid
    fid = fid.strip()
    if fid in FIELD_NAMES:
        return fid
    if fid.startswith("custom:"):
        fid = fid[len("custom:"):]
    return _expr.parse(fid)


def field_jet(L, fid):
    """Order-2 jet of the field ``fid`` on the geometry ``L``."""
    fid = resolve_field(fid)
    if fid == "cos_theta":
        return L.cos_theta.truncate(2)
    if fid == "cos2_theta":
        c = L.cos_theta.truncate(2)
        return c * c
    if fid == "theta":
        sin_val = np.sqrt(np.maximum(L.sin_theta_sq.value, 0.0))
        if np.any(sin_val < EPS_ADAPT):
            raise NearComplexError("theta is not differentiable where sin(theta) = 0")
        return jets.acos(L.cos_theta.truncate(2))
    if fid == "abs_x_sq":
        X = L.X.truncate(2)
        return dot(X, X)
    out = _expr.evaluate(fid, {"u": Jet3.lift(L.u, "var_u", 2), "v": Jet3.lift(L.v, "var_v", 2)})
    if not isinstance(out, Jet3):
        out = Jet3.constant(np.broadcast_to(out, L.shape).astype(float), 2)
    return out


def _coord_grad(f):
    return f.du(), f.dv()


def grad_frame(L, f):
    """Frame components ``e_i(f)`` (values) of the gradient of jet ``f``."""
    return np.stack([L.D(i, f).value for i in range(2)])


def grad_dot(L, f, k):
    """``<grad f, grad k> = g^ij f_i k_j`` (values)."""
    gi = L.g_inv
    fd = [d.value for d in _coord_grad(f)]
    kd = [d.value for d in _coord_grad(k)]
    return sum(gi[i][j].value * fd[i] * kd[j] for i in range(2) for j in range(2))


def laplacian(L, f):
    """``(1/sqrt g) d_i (sqrt g g^ij d_j f)`` from jets (``f`` order >= 2)."""
    sg, gi = L.sqrt_det_g, L.g_inv
    fd = _coord_grad(f)
    flux = [sg * (gi[i][0] * fd[0] + gi[i][1] * fd[1]) for i in range(2)]
    return (flux[0].du().value + flux[1].dv().value) / sg.value


def x_dot_grad(L, f):
    """``<x, grad f> = g^ij <x, x_i> d_j f`` (values)."""
    X, gi = L.X.value, L.g_inv
    xi = [dot(X, L.Xu.value), dot(X, L.Xv.value)]
    fd = [d.value for d in _coord_grad(f)]
    return sum(gi[i][j].value * xi[i] * fd[j] for i in range(2) for j in range(2))


def drift(L, f):
    """Drift Laplacian ``Delta f - <x, grad f>``."""
    return laplacian(L, f) - x_dot_grad(L, f)


def drift_divergence_form(L, f):
    """``e^{|x|^2/2} div(e^{-|x|^2/2} grad f)`` assembled from jets."""
    X = L.X.truncate(2)
    w = jets.exp(-0.5 * dot(X, X))
    sg, gi = L.sqrt_det_g, L.g_inv
    fd = _coord_grad(f)
    flux = [w * sg * (gi[i][0] * fd[0] + gi[i][1] * fd[1]) for i in range(2)]
    return (flux[0].du().value + flux[1].dv().value) / (w.value * sg.value)


# ------------------------------------------------------------------ spec-level ops
def field_jet2(spec, fid, p):
    return field_jet(LocalGeometry(spec, p), fid)


@dataclass(frozen=True)
class Gradient:
    frame: np.ndarray  # (2, ...) components along e1, e2
    norm_sq: np.ndarray
    ambient: np.ndarray  # (4, ...)


def surface_gradient(spec, fid, p):
    L = LocalGeometry(spec, p)
    comps = grad_frame(L, field_jet(L, fid))
    e1, e2 = (e.value for e in L.tangent)
    return Gradient(comps, (comps**2).sum(axis=0), comps[0] * e1 + comps[1] * e2)


def laplace_beltrami(spec, fid, p):
    L = LocalGeometry(spec, p)
    return laplacian(L, field_jet(L, fid))


def drift_laplacian(spec, fid, p):
    L = LocalGeometry(spec, p)
    return drift(L, field_jet(L, fid))


def dbarJM_norm_sq(sf):
    """``|D J_M|^2 = 4 sum_i ((h^4_2i + h^3_1i)^2 + (h^4_1i - h^3_2i)^2)``.

    ``sf`` is a :class:`~kahler.geometry.SecondForms` from an adapted frame.
    """
    require_adapted(sf)
    return dbarJM_from_h(sf.h)


def dbarJM_from_h(h):
    """Same sum from ``h[a][i][j]`` given as nested lists or an array."""
    return 4.0 * sum((h[1][1][i] + h[0][0][i]) ** 2 + (h[1][0][i] - h[0][1][i]) ** 2
                     for i in range(2))


@dataclass(frozen=True)
class ConnectionData:
    gamma: np.ndarray  # (4, 4, 2, ...): <D_{e_i} e_A, e_B> at [A-1, B-1, i-1]

    def __call__(self, A, B, i):
        """1-based access ``Gamma[A][B][i]``."""
        return self.gamma[A - 1, B - 1, i - 1]


def connection_data(spec, p):
    L = LocalGeometry(spec, p)
    g = L.gamma
    return ConnectionData(np.array([[[g[A][B][i].value for i in range(2)] for B in range(4)]
                                    for A in range(4)]))


# ------------------------------------------------------------------ quadrature
@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product rule on the parameter rectangle or on an annulus.

    For ``chart == "polar"`` the two directions are radius and angle
    around the origin of the (u, v) chart; :meth:`points` maps them back
    and folds the polar Jacobian into the weights.
    """

    nodes: tuple  # (nodes_dir0, nodes_dir1)
    weights: tuple
    rules: tuple  # "periodic-trapezoid" | "gauss-legendre"
    domain: tuple
    chart: str = "rect"

    @property
    def shape(self):
        return (len(self.nodes[0]), len(self.nodes[1]))

    def points(self):
        """Meshgrids ``(u, v, w)`` of shape ``self.shape``."""
        a, b = np.meshgrid(self.nodes[0], self.nodes[1], indexing="ij")
        w = np.outer(self.weights[0], self.weights[1])
        if self.chart == "polar":
            return a * np.cos(b), a * np.sin(b), w * a
        return a, b, w

    def describe(self):
        return {"chart": self.chart, "nodes": list(self.shape), "rules": list(self.rules),
                "domain": [list(d) for d in self.domain]}


def _rule(kind, lo, hi, n):
    if kind == "periodic-trapezoid":
        x = lo + (hi - lo) * np.arange(n) / n
        return x, np.full(n, (hi - lo) / n)
    if kind == "gauss-legendre":
        x, w = np.polynomial.legendre.leggauss(n)
        return lo + (hi - lo) * (x + 1) / 2, w * (hi - lo) / 2
    raise ValueError(f"unknown quadrature rule {kind!r}")


def make_grid(spec, nodes_u=DEFAULT_NODES, nodes_v=DEFAULT_NODES, rule_u=None, rule_v=None,
              truncate_radius=DEFAULT_TRUNCATE_RADIUS):
    """Quadrature grid covering ``spec``'s sampling region.

    Periodic directions default to the trapezoid rule over one period,
    others to Gauss-Legendre.  Infinite bounds are cut at
    ``+-truncate_radius``.  Charts with an ``annulus`` are sampled in polar
    form (radius by Gauss-Legendre, angle by the trapezoid rule).
    """
    if spec.annulus is not None:
        inner, outer = spec.annulus
        dom = ((inner, outer), (0.0, 2 * math.pi))
        rules = (rule_u or "gauss-legendre", rule_v or "periodic-trapezoid")
        chart = "polar"
    else:
        dom = tuple((max(lo, -truncate_radius), min(hi, truncate_radius)) if not per else (lo, hi)
                    for (lo, hi), per in zip(spec.domain, spec.periodic))
        rules = tuple(r or ("periodic-trapezoid" if per else "gauss-legendre")
                      for r, per in zip((rule_u, rule_v), spec.periodic))
        chart = "rect"
    built = [_rule(r, lo, hi, n) for r, (lo, hi), n in zip(rules, dom, (nodes_u, nodes_v))]
    return QuadratureGrid((built[0][0], built[1][0]), (built[0][1], built[1][1]), rules, dom, chart)


def integrand_values(L, iid):
    """Values of an integrand id on ``L``'s points."""
    if callable(iid):
        return iid(L)
    if isinstance(iid, str) and ":" in iid and iid.split(":", 1)[0] in ("drift", "laplace",
                                                                        "grad_sq"):
        op, fid = iid.split(":", 1)
        f = field_jet(L, fid)
        if op == "drift":
            return drift(L, f)
        if op == "laplace":
            return laplacian(L, f)
        return grad_dot(L, f, f)
    return field_jet(L, iid).value


def _order_for(iid):
    if callable(iid) or (isinstance(iid, str) and iid.split(":", 1)[0] in ("drift", "laplace",
                                                                           "grad_sq")):
        return 3
    return 3 if iid in ("cos_theta", "cos2_theta", "theta") else 2


def weighted_integral(spec, iid, grid):
    """``sum w f(node) exp(-|x|^2/2) sqrt(det g)`` over ``grid``."""
    u, v, w = grid.points()
    L = LocalGeometry(spec, (u, v), order=_order_for(iid))
    f = integrand_values(L, iid)
    X = L.X.value
    dens = np.exp(-0.5 * dot(X, X)) * L.sqrt_det_g.value
    return float(np.sum(w * f * dens))


def stokes_residual(spec, u_id, v_id, grid):
    """``|int u L(v) w dV + int <grad u, grad v> w dV|`` on a closed surface."""
    if not spec.closed:
        raise UnsupportedDomainError(f"{spec.name} is not closed; the weighted Green identity "
                                     "is only checked on doubly periodic surfaces")
    u, v, w = grid.points()
    L = LocalGeometry(spec, (u, v))
    fu, fv = field_jet(L, u_id), field_jet(L, v_id)
    X = L.X.value
    dens = w * np.exp(-0.5 * dot(X, X)) * L.sqrt_det_g.value
    first = np.sum(dens * fu.value * drift(L, fv))
    second = np.sum(dens * grad_dot(L, fu, fv))
    return float(abs(first + second))
