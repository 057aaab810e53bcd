"""Ambient structures of C^2 = R^4 and per-point surface geometry.

Coordinates are ordered ``(x1, y1, x2, y2)`` with ``z_k = x_k + i y_k``.
Ambient vectors carry their four components on the *first* axis, so a
single point is shape ``(4,)`` and a grid of points is ``(4, nu, nv)``;
the same convention holds for vector-valued jets.

Most helpers below are written once and accept either plain arrays or
:class:`~kahler.jets.Jet3` values.  :class:`LocalGeometry` uses the jet
versions to differentiate frames, forms and angles; the public
``first_forms``/``adapted_frame``/``second_forms`` functions return values.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import jets
from .errors import DomainError, FrameError, NearComplexError, RankError
from .jets import Jet3

#: sin(theta) below this is treated as a complex point.
EPS_ADAPT = 1e-8
#: Gram determinant below this means the differential is not of rank two.
RANK_TOL = 1e-14


# ------------------------------------------------------------------ ambient ops
def J(vec):
    """Complex structure: ``(a, b, c, d) -> (-b, a, -d, c)``."""
    return jets.stack([-vec[1], vec[0], -vec[3], vec[2]])


def dot(a, b):
    return (a * b).sum(axis=0)


def kahler_form(a, b):
    """omega(a, b) = <J a, b>, so that <U, V> = omega(U, J V)."""
    return dot(J(a), b)


def holomorphic_volume(a, b):
    """(Re, Im) of Omega(a, b) for Omega = dz1 ^ dz2."""
    re = a[0] * b[2] - a[1] * b[3] - (b[0] * a[2] - b[1] * a[3])
    im = a[0] * b[3] + a[1] * b[2] - (b[0] * a[3] + b[1] * a[2])
    return re, im


def _normalize_point(p):
    u, v = p
    return np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))


# ------------------------------------------------------------------ immersions
@dataclass(frozen=True)
class ImmersionSpec:
    """A parametric surface ``(u, v) -> (x1, y1, x2, y2)``.

    ``components(u, v)`` must return four values built with the dispatching
    functions of :mod:`kahler.jets`, so that it works for both jets and
    arrays.  ``annulus`` (inner, outer radius) marks charts whose natural
    sampling region is an annulus around the origin rather than the domain
    rectangle.
    """

    name: str
    components: Callable
    domain: tuple = ((-math.inf, math.inf), (-math.inf, math.inf))
    periodic: tuple = (False, False)
    catalog_id: Optional[str] = None
    params: tuple = ()
    expressions: Optional[tuple] = None
    annulus: Optional[tuple] = None
    description: str = field(default="", compare=False)

    @property
    def closed(self):
        return all(self.periodic)

    def periods(self):
        return tuple(hi - lo if per else None
                     for (lo, hi), per in zip(self.domain, self.periodic))

    def point(self, p):
        """Ambient position (values) at ``p``."""
        u, v = _normalize_point(p)
        return jets.stack(list(self.components(u, v)))


def check_domain(spec, u, v):
    for vals, (lo, hi), per, name in zip((u, v), spec.domain, spec.periodic, "uv"):
        if per:
            continue
        if np.any(~np.isfinite(vals)) or np.any(vals < lo - 1e-12) or np.any(vals > hi + 1e-12):
            raise DomainError(f"{name} outside the domain [{lo}, {hi}] of {spec.name}")


def immersion_jets(spec, p, order=3):
    """Order-``order`` jets of the four ambient components at ``p``.

    Returns one vector-valued :class:`Jet3` of shape ``(4,) + shape(p)``;
    index it to get the individual components.

    Raises
    ------
    DomainError
        At singular points of the component expressions.
    RankError
        If ``x_u`` and ``x_v`` are linearly dependent (only when ``order >= 1``).
    """
    u, v = _normalize_point(p)
    check_domain(spec, u, v)
    ju = Jet3.lift(u, "var_u", order)
    jv = Jet3.lift(v, "var_v", order)
    comps = list(spec.components(ju, jv))
    if len(comps) != 4:
        raise ValueError(f"{spec.name}: expected 4 components, got {len(comps)}")
    comps = [c if isinstance(c, Jet3) else Jet3.constant(np.broadcast_to(c, u.shape), order)
             for c in comps]
    X = jets.stack(comps)
    if order >= 1:
        xu, xv = X.du().value, X.dv().value
        gram = dot(xu, xu) * dot(xv, xv) - dot(xu, xv) ** 2
        if np.any(gram < RANK_TOL):
            raise RankError(f"{spec.name}: differential has rank < 2 (Gram det {np.min(gram):.3g})")
    return X


def reparametrized(spec, phi, name=None):
    """Compose ``spec`` with a parameter map ``phi(u, v) -> (U, V)``."""

    def components(u, v):
        U, V = phi(u, v)
        return spec.components(U, V)

    return ImmersionSpec(name or f"{spec.name} (reparametrized)", components, spec.domain,
                         spec.periodic, annulus=spec.annulus)


# ------------------------------------------------------------------ value types
@dataclass(frozen=True)
class FirstForms:
    x_u: np.ndarray
    x_v: np.ndarray
    g: np.ndarray  # (2, 2, ...)
    g_inv: np.ndarray
    sqrt_det_g: np.ndarray


@dataclass(frozen=True)
class TangentFrame:
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    e4: np.ndarray
    cos_theta: np.ndarray
    sin_theta: np.ndarray
    adapted: bool
    coords: np.ndarray  # (2, 2, ...): e_i = coords[i, 0] d/du + coords[i, 1] d/dv

    @property
    def vectors(self):
        return (self.e1, self.e2, self.e3, self.e4)


@dataclass(frozen=True)
class SecondForms:
    h: np.ndarray  # (2, 2, 2, ...): h[a - 3, i - 1, j - 1]
    H3: np.ndarray
    H4: np.ndarray
    H_ambient: np.ndarray
    norm_h_sq: np.ndarray
    gauss_K: np.ndarray
    adapted: bool


# ------------------------------------------------------------------ shared formulas
def _metric(xu, xv):
    return dot(xu, xu), dot(xu, xv), dot(xv, xv)


def _tangent_coords(g11, g12, g22, rotation=0.0):
    """Coordinate coefficients of the Gram-Schmidt frame e1 ~ x_u."""
    s11 = jets.sqrt(g11)
    sd = jets.sqrt(g11 * g22 - g12 * g12)
    E = [[1.0 / s11, 0.0], [-g12 / (s11 * sd), s11 / sd]]
    if rotation:
        c, s = math.cos(rotation), math.sin(rotation)
        E = [[c * E[0][k] + s * E[1][k] for k in range(2)],
             [-s * E[0][k] + c * E[1][k] for k in range(2)]]
    return E


def _combine(E, xu, xv):
    return [E[i][0] * xu + E[i][1] * xv for i in range(2)]


def _sin_theta(e1, e2):
    cos = kahler_form(e1, e2)
    n3 = J(e1) - cos * e2
    return cos, n3, dot(n3, n3)


def _adapted_normals(e1, e2, eps=EPS_ADAPT):
    cos, n3, sin2 = _sin_theta(e1, e2)
    sin_val = np.sqrt(np.maximum(jets.value(sin2), 0.0))
    if np.any(sin_val < eps):
        raise NearComplexError(
            f"sin(theta) = {np.min(sin_val):.3g} < {eps:g}: adapted frame undefined")
    sin = jets.sqrt(sin2)
    e3 = n3 / sin
    e4 = (J(e2) + cos * e1) / sin
    return cos, sin, e3, e4


# ------------------------------------------------------------------ public value ops
def first_forms(X):
    """Induced metric data from the vector jet ``X`` (order >= 1)."""
    xu, xv = X.du().value, X.dv().value
    g11, g12, g22 = _metric(xu, xv)
    det = g11 * g22 - g12 * g12
    if np.any(det < RANK_TOL):
        raise RankError("differential has rank < 2")
    g = np.stack([np.stack([g11, g12]), np.stack([g12, g22])])
    g_inv = np.stack([np.stack([g22, -g12]), np.stack([-g12, g11])]) / det
    return FirstForms(xu, xv, g, g_inv, np.sqrt(det))


def _frame_coords(ff, rotation=0.0):
    E = _tangent_coords(ff.g[0, 0], ff.g[0, 1], ff.g[1, 1], rotation)
    coords = np.empty((2, 2) + np.shape(ff.sqrt_det_g))
    for i in range(2):
        for k in range(2):
            coords[i, k] = E[i][k]
    return E, coords


def kahler_cos(ff):
    """cos(theta) = omega(e1, e2) for the Gram-Schmidt frame of ``ff``."""
    E, _ = _frame_coords(ff)
    e1, e2 = _combine(E, ff.x_u, ff.x_v)
    return np.clip(kahler_form(e1, e2), -1.0, 1.0)


def adapted_frame(ff, rotation=0.0, eps=EPS_ADAPT):
    """Orthonormal frame with ``J e1 = cos e2 + sin e3``, ``J e2 = -cos e1 + sin e4``.

    ``rotation`` turns (e1, e2) by a constant angle before the normals are
    built.  Raises :class:`NearComplexError` where ``sin(theta) < eps``.
    """
    E, coords = _frame_coords(ff, rotation)
    e1, e2 = _combine(E, ff.x_u, ff.x_v)
    cos, sin, e3, e4 = _adapted_normals(e1, e2, eps)
    return TangentFrame(e1, e2, e3, e4, cos, sin, True, coords)


def generic_normal_frame(ff, rotation=0.0):
    """Orthonormal frame whose normals come from Gram-Schmidt on the ambient basis.

    Always defined; oriented so that det(e1, e2, e3, e4) = +1.
    """
    E, coords = _frame_coords(ff, rotation)
    e1, e2 = _combine(E, ff.x_u, ff.x_v)
    cos, _, sin2 = _sin_theta(e1, e2)
    shape = np.shape(cos)
    basis = np.eye(4).reshape((4, 4) + (1,) * len(shape))
    basis = np.broadcast_to(basis, (4, 4) + shape)

    def residuals(vectors, against):
        out = vectors.copy()
        for w in against:
            out = out - (out * w[None]).sum(axis=1)[:, None] * w[None]
        return out

    def pick(cands):
        norms = np.sqrt((cands**2).sum(axis=1))
        k = np.argmax(norms, axis=0)
        chosen = np.take_along_axis(cands, k[None, None], axis=0)[0]
        nk = np.take_along_axis(norms, k[None], axis=0)[0]
        return chosen / nk

    e3 = pick(residuals(basis, (e1, e2)))
    e4 = pick(residuals(basis, (e1, e2, e3)))
    M = np.stack([e1, e2, e3, e4])
    det = np.linalg.det(np.moveaxis(M, (0, 1), (-2, -1)))
    e4 = np.where(det < 0, -e4, e4)
    sin = np.sqrt(np.maximum(sin2, 0.0))
    return TangentFrame(e1, e2, e3, e4, np.clip(cos, -1, 1), sin, False, coords)


def _frame_hessians(E, Xh):
    """S[i][j] = sum_kl E[i][k] E[j][l] X_kl (ambient, tangent part included)."""
    return [[sum(E[i][k] * E[j][l] * Xh[k][l] for k in range(2) for l in range(2))
             for j in range(2)] for i in range(2)]


def _hessian_jets(X):
    Xu, Xv = X.du(), X.dv()
    Xuv = Xu.dv()
    return [[Xu.du(), Xuv], [Xuv, Xv.dv()]]


def second_forms(X, frame, ff=None):
    """Second fundamental form components in ``frame`` (values).

    ``h[a - 3, i - 1, j - 1] = <d^2 x(e_i, e_j), e_a>`` from the coordinate
    Hessian of the vector jet ``X`` (order >= 2).
    """
    Xh = [[j.value for j in row] for row in _hessian_jets(X)]
    E = [[frame.coords[i, k] for k in range(2)] for i in range(2)]
    S = _frame_hessians(E, Xh)
    normals = (frame.e3, frame.e4)
    h = np.stack([np.stack([np.stack([dot(S[i][j], n) for j in range(2)])
                            for i in range(2)]) for n in normals])
    H3 = h[0, 0, 0] + h[0, 1, 1]
    H4 = h[1, 0, 0] + h[1, 1, 1]
    H_ambient = H3 * frame.e3 + H4 * frame.e4
    norm_h_sq = (h**2).sum(axis=(0, 1, 2))
    K = (h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] ** 2).sum(axis=0)
    return SecondForms(h, H3, H4, H_ambient, norm_h_sq, K, frame.adapted)


def tangent_normal_split(vec, frame):
    """Frame components: ``vec = t1 e1 + t2 e2 + n3 e3 + n4 e4``."""
    t = np.stack([dot(vec, frame.e1), dot(vec, frame.e2)])
    n = np.stack([dot(vec, frame.e3), dot(vec, frame.e4)])
    return t, n


def require_adapted(obj):
    if not obj.adapted:
        raise FrameError("this quantity is defined relative to an adapted frame")


# ------------------------------------------------------------------ jet-level geometry
class LocalGeometry:
    """Jets of the moving frame and derived quantities at one or many points.

    With ``order=3`` (the default) the frame, the metric and cos(theta) are
    order-2 jets, the second fundamental form and connection coefficients
    order-1 jets, which is enough for every identity checked downstream.
    Quantities needing the adapted frame raise :class:`NearComplexError`
    on first access when some point has ``sin(theta) < EPS_ADAPT``.
    """

    def __init__(self, spec, p, order=3, rotation=0.0):
        self.spec = spec
        self.u, self.v = _normalize_point(p)
        self.order = order
        self.rotation = rotation
        self.X = immersion_jets(spec, (self.u, self.v), order)

    @property
    def shape(self):
        return self.u.shape

    # -- first order
    @cached_property
    def Xu(self):
        return self.X.du()

    @cached_property
    def Xv(self):
        return self.X.dv()

    @cached_property
    def metric(self):
        return _metric(self.Xu, self.Xv)

    @cached_property
    def sqrt_det_g(self):
        g11, g12, g22 = self.metric
        return jets.sqrt(g11 * g22 - g12 * g12)

    @cached_property
    def g_inv(self):
        g11, g12, g22 = self.metric
        det = g11 * g22 - g12 * g12
        return [[g22 / det, -g12 / det], [-g12 / det, g11 / det]]

    @cached_property
    def E(self):
        return _tangent_coords(*self.metric, rotation=self.rotation)

    @cached_property
    def tangent(self):
        return _combine(self.E, self.Xu, self.Xv)

    @cached_property
    def cos_theta(self):
        e1, e2 = self.tangent
        return kahler_form(e1, e2)

    @cached_property
    def sin_theta_sq(self):
        return _sin_theta(*self.tangent)[2]

    @cached_property
    def _adapted(self):
        return _adapted_normals(*self.tangent)

    @property
    def sin_theta(self):
        return self._adapted[1]

    @property
    def normals(self):
        return self._adapted[2], self._adapted[3]

    @property
    def frame(self):
        return (*self.tangent, *self.normals)

    def D(self, i, f):
        """Derivative of a jet along e_i (order drops by one)."""
        terms = [c * d() for c, d in zip(self.E[i], (f.du, f.dv))
                 if isinstance(c, Jet3) or c != 0.0]
        return sum(terms[1:], terms[0])

    # -- frame-independent second-order data
    @cached_property
    def frame_hessians(self):
        return _frame_hessians(self.E, _hessian_jets(self.X))

    def _normal_part(self, w):
        e1, e2 = self.tangent
        return w - dot(w, e1) * e1 - dot(w, e2) * e2

    @cached_property
    def h_vectors(self):
        """h(e_i, e_j) as ambient normal vectors (any normal frame)."""
        S = self.frame_hessians
        return [[self._normal_part(S[i][j]) for j in range(2)] for i in range(2)]

    @cached_property
    def H(self):
        hv = self.h_vectors
        return hv[0][0] + hv[1][1]

    @cached_property
    def x_tangent(self):
        """Frame components <x, e_i>."""
        return [dot(self.X, e) for e in self.tangent]

    @cached_property
    def x_perp(self):
        return self._normal_part(self.X)

    @cached_property
    def norm_h_sq(self):
        hv = self.h_vectors
        return sum(dot(hv[i][j], hv[i][j]) for i in range(2) for j in range(2))

    @cached_property
    def eta(self):
        re, im = holomorphic_volume(self.Xu, self.Xv)
        return re / self.sqrt_det_g, im / self.sqrt_det_g

    # -- adapted-frame data
    @cached_property
    def h(self):
        """h[a][i][j] (a = 0 for e3, 1 for e4) as order-1 jets."""
        S = self.frame_hessians
        return [[[dot(S[i][j], n) for j in range(2)] for i in range(2)] for n in self.normals]

    @cached_property
    def H_frame(self):
        h = self.h
        return h[0][0][0] + h[0][1][1], h[1][0][0] + h[1][1][1]

    @cached_property
    def gamma(self):
        """gamma[A][B][i] = <D_{e_i} e_A, e_B> as order-1 jets."""
        fr = self.frame
        deriv = [[self.D(i, fr[A]) for i in range(2)] for A in range(4)]
        return [[[dot(deriv[A][i], fr[B]) for i in range(2)] for B in range(4)]
                for A in range(4)]

    def values(self, jet):
        return jets.value(jet)

    # -- value snapshots
    def first_forms(self):
        return first_forms(self.X)

    def frame_values(self, adapted=True):
        ff = self.first_forms()
        if adapted:
            return adapted_frame(ff, self.rotation)
        return generic_normal_frame(ff, self.rotation)

    def second_form_values(self, adapted=True):
        return second_forms(self.X, self.frame_values(adapted))
