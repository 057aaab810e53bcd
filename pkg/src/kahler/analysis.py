"""Per-point bundle of the main invariants of a surface.

Quantities that need the adapted frame (frame components of ``h`` and
``H``, ``|D J_M|^2``, ``|grad theta|``) are NaN at complex points, where
``sin(theta) < EPS_ADAPT``; everything else is defined at every regular
point.
"""

from dataclasses import dataclass, fields

import numpy as np

from .calculus import dbarJM_from_h
from .geometry import EPS_ADAPT, LocalGeometry, _normalize_point, dot
from .lagrangian import EPS_ETA


@dataclass(frozen=True)
class SurfaceData:
    u: np.ndarray
    v: np.ndarray
    x: np.ndarray  # (4, ...)
    g: np.ndarray  # (2, 2, ...)
    cos_theta: np.ndarray
    eta_re: np.ndarray
    eta_im: np.ndarray
    beta: np.ndarray  # principal value, NaN where |eta| < EPS_ETA
    norm_h_sq: np.ndarray
    gauss_K: np.ndarray
    H_ambient: np.ndarray  # (4, ...)
    H3: np.ndarray
    H4: np.ndarray
    h: np.ndarray  # (2, 2, 2, ...) in the adapted frame
    grad_theta_norm: np.ndarray
    dbarJM_sq: np.ndarray
    shrinker_residual: np.ndarray
    adapted: np.ndarray  # bool mask

    @property
    def eta_abs(self):
        return np.hypot(self.eta_re, self.eta_im)

    def scalars(self):
        """Flat name -> array mapping used by the CLI tables."""
        out = {"u": self.u, "v": self.v, "cos_theta": self.cos_theta, "beta": self.beta,
               "eta_re": self.eta_re, "eta_im": self.eta_im, "eta_abs": self.eta_abs,
               "norm_h_sq": self.norm_h_sq, "H3": self.H3, "H4": self.H4,
               "H_norm": np.sqrt(dot(self.H_ambient, self.H_ambient)),
               "grad_theta_norm": self.grad_theta_norm, "dbarJM_sq": self.dbarJM_sq,
               "shrinker_residual": self.shrinker_residual, "gauss_K": self.gauss_K}
        for k in range(4):
            out[f"x{k}"] = self.x[k]
        return out


def _scatter(mask, values, shape):
    out = np.full(shape, np.nan)
    out[..., mask] = values
    return out


def surface_data(spec, p):
    """Evaluate :class:`SurfaceData` at a point or on arrays of points."""
    u, v = _normalize_point(p)
    shape = u.shape
    u, v = u.ravel(), v.ravel()
    L = LocalGeometry(spec, (u, v))
    val = lambda j: j.value  # noqa: E731

    cos = val(L.cos_theta)
    sin = np.sqrt(np.maximum(val(L.sin_theta_sq), 0.0))
    re, im = val(L.eta[0]), val(L.eta[1])
    mod = np.hypot(re, im)
    beta = np.where(mod >= EPS_ETA, np.arctan2(im, re), np.nan)
    beta = np.where(beta <= -np.pi, beta + 2 * np.pi, beta)
    hv = [[val(L.h_vectors[i][j]) for j in range(2)] for i in range(2)]
    K = dot(hv[0][0], hv[1][1]) - dot(hv[0][1], hv[0][1])
    H = val(L.H)
    R = H + val(L.x_perp)
    grad_cos = np.stack([L.D(i, L.cos_theta).value for i in range(2)])

    mask = sin >= EPS_ADAPT
    n = u.size
    H3 = np.full(n, np.nan)
    H4 = np.full(n, np.nan)
    h = np.full((2, 2, 2, n), np.nan)
    if mask.any():
        La = L if mask.all() else LocalGeometry(spec, (u[mask], v[mask]))
        hvals = np.array([[[val(La.h[a][i][j]) for j in range(2)] for i in range(2)]
                          for a in range(2)])
        h[..., mask] = hvals
        H3[mask] = hvals[0, 0, 0] + hvals[0, 1, 1]
        H4[mask] = hvals[1, 0, 0] + hvals[1, 1, 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        grad_theta = np.where(mask, np.sqrt((grad_cos**2).sum(0)) / sin, np.nan)
    dbar = dbarJM_from_h(h)

    g11, g12, g22 = (val(m) for m in L.metric)
    g = np.stack([np.stack([g11, g12]), np.stack([g12, g22])])
    data = dict(u=u, v=v, x=val(L.X), g=g, cos_theta=cos, eta_re=re, eta_im=im, beta=beta,
                norm_h_sq=val(L.norm_h_sq), gauss_K=K, H_ambient=H, H3=H3, H4=H4, h=h,
                grad_theta_norm=grad_theta, dbarJM_sq=dbar,
                shrinker_residual=np.sqrt(dot(R, R)), adapted=mask)
    reshaped = {k: np.asarray(a).reshape(np.shape(a)[:-1] + shape) for k, a in data.items()}
    return SurfaceData(**reshaped)


FIELDS = tuple(f.name for f in fields(SurfaceData))
