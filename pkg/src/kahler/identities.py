"""Pointwise residuals of the Kähler-angle and self-shrinker identities.

Each :class:`IdentityId` belongs to a hypothesis class.  The hypothesis is
measured at every point (``|grad theta|``, ``|cos theta|``, the shrinker
residual ``|H + x_perp|``) rather than taken from catalog metadata, and a
residual is always reported, whether or not its hypothesis holds there.
The Lagrangian hypothesis asks for ``cos(theta) = 0`` to first order
(``grad theta = 0`` as well): an isolated zero of ``cos(theta)`` on a
non-Lagrangian surface does not make ``H = J grad(beta)`` hold there.

All residuals are absolute Euclidean norms of "left side minus right side".
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .calculus import dbarJM_from_h, drift, laplacian
from .errors import KahlerError
from .geometry import EPS_ADAPT, J, LocalGeometry, _normalize_point, dot
from .lagrangian import EPS_ETA, d_beta_jets

CONSTANT_THETA_TOL = 1e-6
LAGRANGIAN_TOL = 1e-8
SHRINKER_TOL = 1e-6
DEFAULT_LAMBDA = 0.5


class Hypothesis(str, enum.Enum):
    UNIVERSAL = "universal"
    CONSTANT_THETA = "constant-theta"
    LAGRANGIAN = "lagrangian"
    SHRINKER = "shrinker"
    CONSTANT_THETA_SHRINKER = "constant-theta-shrinker"


class IdentityId(str, enum.Enum):
    MORVAN_GENERAL = "MORVAN_GENERAL"
    MORVAN_LAGRANGIAN = "MORVAN_LAGRANGIAN"
    DTHETA = "DTHETA"
    CONNECTION = "CONNECTION"
    ETA_NORM = "ETA_NORM"
    SHRINKER_DEF = "SHRINKER_DEF"
    SHRINKER_CODAZZI = "SHRINKER_CODAZZI"
    SHAPE_DRIFT = "SHAPE_DRIFT"
    JH_SPLIT = "JH_SPLIT"
    DIV_JH = "DIV_JH"
    L_COS = "L_COS"
    L_COS2 = "L_COS2"
    PINCH = "PINCH"

    @property
    def hypothesis(self):
        return HYPOTHESIS[self]

    @property
    def statement(self):
        return STATEMENTS[self]


I = IdentityId
H_ = Hypothesis
HYPOTHESIS = {
    I.MORVAN_GENERAL: H_.CONSTANT_THETA,
    I.MORVAN_LAGRANGIAN: H_.LAGRANGIAN,
    I.DTHETA: H_.UNIVERSAL,
    I.CONNECTION: H_.UNIVERSAL,
    I.ETA_NORM: H_.UNIVERSAL,
    I.SHRINKER_DEF: H_.SHRINKER,
    I.SHRINKER_CODAZZI: H_.SHRINKER,
    I.SHAPE_DRIFT: H_.SHRINKER,
    I.JH_SPLIT: H_.UNIVERSAL,
    I.DIV_JH: H_.CONSTANT_THETA_SHRINKER,
    I.L_COS: H_.SHRINKER,
    I.L_COS2: H_.SHRINKER,
    I.PINCH: H_.SHRINKER,
}
STATEMENTS = {
    I.MORVAN_GENERAL: "sin^2(theta) grad(beta) = -(JH)^T",
    I.MORVAN_LAGRANGIAN: "H = J grad(beta)",
    I.DTHETA: "grad(theta) = sum_i (h^4_1i - h^3_2i) e_i",
    I.CONNECTION: "(w_1^3 + w_2^4) cos(theta) + (w_3^4 - w_1^2) sin(theta) = 0",
    I.ETA_NORM: "|eta|^2 = sin^2(theta)",
    I.SHRINKER_DEF: "H = -x_perp",
    I.SHRINKER_CODAZZI: "H^a_,i = sum_j h^a_ij <x, e_j>",
    I.SHAPE_DRIFT: "A_H v = v - D_v x^T",
    I.JH_SPLIT: "(JH)^T = -sin(theta)(H^3 e1 + H^4 e2), (JH)^perp = cos(theta)(H^4 e3 - H^3 e4)",
    I.DIV_JH: "div (JH)^T = <(JH)^T, x^T>",
    I.L_COS: "L cos(theta) = -cos(theta) |DJ_M|^2 / 4",
    I.L_COS2: "L cos^2(theta) / 2 = sin^2(theta) |grad theta|^2 - cos^2(theta) |DJ_M|^2 / 4",
    I.PINCH: "|grad theta|^2 <= lambda cos^2 |DJ_M|^2 / (4 (1 - lambda cos^2)), as a margin",
}
del I, H_

FRAME_FREE = (IdentityId.ETA_NORM, IdentityId.SHRINKER_DEF)


@dataclass
class ResidualSample:
    """Residual of one identity at one point or an array of points."""

    id: IdentityId
    point: tuple
    residual: np.ndarray
    hypothesis_met: np.ndarray
    diagnostics: dict = field(default_factory=dict)


# ------------------------------------------------------------------ residual kernels
def _norm(*parts):
    return np.sqrt(sum(np.asarray(p) ** 2 for p in parts))


def _vnorm(vec):
    return np.sqrt(dot(vec, vec))


class _Kernel:
    """Shared intermediate quantities for all identities on one point set."""

    def __init__(self, L, lam=DEFAULT_LAMBDA):
        self.L = L
        self.lam = lam

    # -- frame-free
    def diagnostics(self):
        L = self.L
        R = L.H.value + L.x_perp.value
        return {"shrinker_residual": _vnorm(R), "abs_cos_theta": np.abs(L.cos_theta.value)}

    def eta_norm(self):
        re, im = (e.value for e in self.L.eta)
        return np.abs(re * re + im * im - self.L.sin_theta_sq.value)

    def shrinker_def(self):
        return _vnorm(self.L.H.value + self.L.x_perp.value)

    # -- adapted
    def setup(self):
        L = self.L
        v = lambda j: j.value  # noqa: E731
        self.cos, self.sin = v(L.cos_theta), v(L.sin_theta)
        self.e = [v(e) for e in L.frame]
        self.h = [[[v(L.h[a][i][j]) for j in range(2)] for i in range(2)] for a in range(2)]
        self.G = [[[v(L.gamma[A][B][i]) for i in range(2)] for B in range(4)] for A in range(4)]
        H3, H4 = L.H_frame
        self.Hj = (H3, H4)
        self.Hf = (v(H3), v(H4))
        self.H = v(L.H)
        self.JH = J(self.H)
        self.dtheta = [-L.D(i, L.cos_theta).value / self.sin for i in range(2)]
        self.grad_theta_sq = self.dtheta[0] ** 2 + self.dtheta[1] ** 2
        self.dbar = dbarJM_from_h(self.h)
        self.xj = [dot(L.X.truncate(2), e) for e in L.tangent]  # <x, e_j> jets
        self.xt = [j.value for j in self.xj]
        mod = np.hypot(*(e.value for e in L.eta))
        self.eta_ok = mod >= EPS_ETA

    def grad_beta(self):
        L = self.L
        with np.errstate(invalid="ignore", divide="ignore"):
            db = [d.value for d in d_beta_jets(L)]
        E = [[jets.value(c) for c in row] for row in L.E]
        comps = [E[i][0] * db[0] + E[i][1] * db[1] for i in range(2)]
        return comps[0] * self.e[0] + comps[1] * self.e[1]

    def JH_tangent(self):
        return sum(dot(self.JH, self.e[i]) * self.e[i] for i in range(2))

    def morvan_general(self):
        out = _vnorm(self.sin**2 * self.grad_beta() + self.JH_tangent())
        return np.where(self.eta_ok, out, np.nan)

    def morvan_lagrangian(self):
        out = _vnorm(self.H - J(self.grad_beta()))
        return np.where(self.eta_ok, out, np.nan)

    def dtheta_residual(self):
        h = self.h
        return _norm(*(self.dtheta[i] - (h[1][0][i] - h[0][1][i]) for i in range(2)))

    def connection(self):
        G, c, s = self.G, self.cos, self.sin
        return _norm(*((G[0][2][i] + G[1][3][i]) * c + (G[2][3][i] - G[0][1][i]) * s
                       for i in range(2)))

    def H_cov(self, a, i):
        """Normal covariant derivative H^a_{,i}."""
        L = self.L
        return L.D(i, self.Hj[a]).value + sum(self.Hf[b] * self.G[b + 2][a + 2][i]
                                              for b in range(2))

    def codazzi(self):
        h = self.h
        return _norm(*(self.H_cov(a, i) - sum(h[a][i][j] * self.xt[j] for j in range(2))
                       for a in range(2) for i in range(2)))

    def shape_drift(self):
        L, h, G = self.L, self.h, self.G
        parts = []
        for i in range(2):
            for j in range(2):
                A = sum(self.Hf[a] * h[a][i][j] for a in range(2))
                Dx = L.D(i, self.xj[j]).value + sum(self.xt[k] * G[k][j][i] for k in range(2))
                parts.append(A - ((1.0 if i == j else 0.0) - Dx))
        return _norm(*parts)

    def jh_split(self):
        e, (H3, H4) = self.e, self.Hf
        JH_n = self.JH - self.JH_tangent()
        t = self.JH_tangent() + self.sin * (H3 * e[0] + H4 * e[1])
        n = JH_n - self.cos * (H4 * e[2] - H3 * e[3])
        return _norm(_vnorm(t), _vnorm(n))

    def div_jh(self):
        L, G = self.L, self.G
        JH = J(L.H)
        V = [dot(JH, L.tangent[i]) for i in range(2)]
        Vv = [c.value for c in V]
        div = sum(L.D(i, V[i]).value + sum(Vv[k] * G[k][i][i] for k in range(2))
                  for i in range(2))
        return np.abs(div - (Vv[0] * self.xt[0] + Vv[1] * self.xt[1]))

    def l_cos(self):
        return np.abs(drift(self.L, self.L.cos_theta) + 0.25 * self.cos * self.dbar)

    def l_cos2(self):
        c = self.L.cos_theta
        lhs = 0.5 * drift(self.L, c * c)
        rhs = self.sin**2 * self.grad_theta_sq - 0.25 * self.cos**2 * self.dbar
        return np.abs(lhs - rhs)

    def pinch_margin(self):
        c2 = self.cos**2
        return self.lam * c2 * self.dbar / (4 * (1 - self.lam * c2)) - self.grad_theta_sq

    def laplace_cos_universal(self):
        """``Delta cos + cos |DJ_M|^2 / 4 + sin (H^4_,1 - H^3_,2)``: holds on any surface."""
        lap = laplacian(self.L, self.L.cos_theta)
        return np.abs(lap + 0.25 * self.cos * self.dbar
                      + self.sin * (self.H_cov(1, 0) - self.H_cov(0, 1)))


_ADAPTED = {
    IdentityId.MORVAN_GENERAL: "morvan_general",
    IdentityId.MORVAN_LAGRANGIAN: "morvan_lagrangian",
    IdentityId.DTHETA: "dtheta_residual",
    IdentityId.CONNECTION: "connection",
    IdentityId.SHRINKER_CODAZZI: "codazzi",
    IdentityId.SHAPE_DRIFT: "shape_drift",
    IdentityId.JH_SPLIT: "jh_split",
    IdentityId.DIV_JH: "div_jh",
    IdentityId.L_COS: "l_cos",
    IdentityId.L_COS2: "l_cos2",
}


def _hypothesis_mask(hyp, diag):
    shrinker = diag["shrinker_residual"] < SHRINKER_TOL
    const = diag["grad_theta_norm"] < CONSTANT_THETA_TOL
    return {
        Hypothesis.UNIVERSAL: np.ones_like(shrinker),
        Hypothesis.CONSTANT_THETA: const,
        Hypothesis.LAGRANGIAN: (diag["abs_cos_theta"] < LAGRANGIAN_TOL) & const,
        Hypothesis.SHRINKER: shrinker,
        Hypothesis.CONSTANT_THETA_SHRINKER: shrinker & const,
    }[hyp]


def evaluate(spec, p, ids=None, lam=DEFAULT_LAMBDA):
    """Residual samples for ``ids`` (default: all) on the points ``p``.

    Points with ``sin(theta) < EPS_ADAPT`` get NaN residuals for the
    identities that need the adapted frame.  Errors raised by the geometry
    (singular points, rank loss) propagate.
    """
    ids = list(IdentityId) if ids is None else [IdentityId(i) for i in ids]
    u, v = _normalize_point(p)
    shape = u.shape
    u, v = u.ravel(), v.ravel()
    L = LocalGeometry(spec, (u, v))
    k = _Kernel(L, lam)
    diag = k.diagnostics()
    sin = np.sqrt(np.maximum(L.sin_theta_sq.value, 0.0))
    mask = sin >= EPS_ADAPT
    diag["adapted"] = mask
    diag["grad_theta_norm"] = np.full(u.size, np.nan)
    results = {}
    if IdentityId.ETA_NORM in ids:
        results[IdentityId.ETA_NORM] = k.eta_norm()
    if IdentityId.SHRINKER_DEF in ids:
        results[IdentityId.SHRINKER_DEF] = k.shrinker_def()
    adapted_ids = [i for i in ids if i not in FRAME_FREE]
    need_adapted = adapted_ids or any(HYPOTHESIS[i] in (Hypothesis.CONSTANT_THETA,
                                                        Hypothesis.LAGRANGIAN,
                                                        Hypothesis.CONSTANT_THETA_SHRINKER)
                                      for i in ids)
    if mask.any() and need_adapted:
        La = L if mask.all() else LocalGeometry(spec, (u[mask], v[mask]))
        ka = _Kernel(La, lam)
        ka.setup()
        diag["grad_theta_norm"][mask] = np.sqrt(ka.grad_theta_sq)
        diag.setdefault("pinch_margin", np.full(u.size, np.nan))[mask] = ka.pinch_margin()
        for i in adapted_ids:
            out = np.full(u.size, np.nan)
            if i == IdentityId.PINCH:
                out[mask] = np.maximum(0.0, -ka.pinch_margin()) + 0.0
            else:
                out[mask] = getattr(ka, _ADAPTED[i])()
            results[i] = out
    else:
        for i in adapted_ids:
            results[i] = np.full(u.size, np.nan)
    samples = {}
    for i in ids:
        met = _hypothesis_mask(HYPOTHESIS[i], diag)
        met = met & np.isfinite(results[i])
        samples[i] = ResidualSample(
            i, (u.reshape(shape), v.reshape(shape)), results[i].reshape(shape),
            met.reshape(shape), {kk: np.reshape(vv, shape) for kk, vv in diag.items()})
    return samples


def identity_residual(spec, id, p, lam=DEFAULT_LAMBDA):
    """:class:`ResidualSample` of one identity at ``p``."""
    id = IdentityId(id)
    return evaluate(spec, p, [id], lam)[id]


def laplace_cos_residual(spec, p):
    """Residual of the frame identity for ``Delta cos(theta)`` valid on any surface."""
    k = _Kernel(LocalGeometry(spec, p))
    k.setup()
    return k.laplace_cos_universal()


# ------------------------------------------------------------------ suite
@dataclass
class IdentityResult:
    id: IdentityId
    max_residual: float
    mean_residual: float
    max_residual_hypothesis_met: float
    points_evaluated: int
    points_hypothesis_met: int
    points_skipped: int
    tolerance: float
    passed: bool

    def as_dict(self):
        return {"hypothesis": self.id.hypothesis.value, "statement": self.id.statement,
                "max_residual": self.max_residual, "mean_residual": self.mean_residual,
                "max_residual_hypothesis_met": self.max_residual_hypothesis_met,
                "points_evaluated": self.points_evaluated,
                "points_hypothesis_met": self.points_hypothesis_met,
                "points_skipped": self.points_skipped, "tolerance": self.tolerance,
                "pass": self.passed}


@dataclass
class IdentityReport:
    surface: str
    grid: dict
    results: dict  # IdentityId -> IdentityResult
    errors: list = field(default_factory=list)

    @property
    def all_pass(self):
        return all(r.passed for r in self.results.values())

    def __getitem__(self, id):
        return self.results[IdentityId(id)]

    def as_dict(self):
        return {"surface": self.surface, "grid": self.grid, "all_pass": self.all_pass,
                "identities": {i.value: r.as_dict() for i, r in self.results.items()},
                "errors": self.errors}


def _grid_points(grid):
    if hasattr(grid, "points"):
        u, v, _ = grid.points()
        return u.ravel(), v.ravel(), grid.describe()
    u, v = _normalize_point(grid)
    return u.ravel(), v.ravel(), {"points": int(u.size)}


def _evaluate_tolerant(spec, u, v, lam):
    """Vectorised evaluation, falling back to point-by-point on errors."""
    try:
        return evaluate(spec, (u, v), lam=lam), []
    except KahlerError:
        pass
    res = {i: np.full(u.size, np.nan) for i in IdentityId}
    met = {i: np.zeros(u.size, bool) for i in IdentityId}
    errors = []
    for n in range(u.size):
        try:
            s = evaluate(spec, (u[n:n + 1], v[n:n + 1]), lam=lam)
        except KahlerError as exc:
            errors.append({"u": float(u[n]), "v": float(v[n]), "error": type(exc).__name__,
                           "message": str(exc)})
            continue
        for i in IdentityId:
            res[i][n] = s[i].residual[0]
            met[i][n] = s[i].hypothesis_met[0]
    return {i: ResidualSample(i, (u, v), res[i], met[i]) for i in IdentityId}, errors


def run_suite(spec, grid, tolerances=1e-8, lam=DEFAULT_LAMBDA):
    """Evaluate every identity on every node of ``grid`` and aggregate.

    ``tolerances`` is a float or a mapping from id (or id name) to float.
    An identity passes iff its maximum residual over the points where its
    hypothesis holds is below tolerance (vacuously when there are none).
    """
    u, v, desc = _grid_points(grid)
    samples, errors = _evaluate_tolerant(spec, u, v, lam)
    results = {}
    for i in IdentityId:
        if isinstance(tolerances, dict):
            tol = tolerances.get(i, tolerances.get(i.value, 1e-8))
        else:
            tol = float(tolerances)
        r = np.asarray(samples[i].residual, float).ravel()
        met = np.asarray(samples[i].hypothesis_met, bool).ravel()
        ok = np.isfinite(r)
        rmax = float(np.max(r[ok])) if ok.any() else math.nan
        rmean = float(np.mean(r[ok])) if ok.any() else math.nan
        hmax = float(np.max(r[met])) if met.any() else math.nan
        results[i] = IdentityResult(i, rmax, rmean, hmax, int(ok.sum()), int(met.sum()),
                                    int((~ok).sum()), tol, bool(not met.any() or hmax < tol))
    return IdentityReport(spec.name, desc, results, errors)
