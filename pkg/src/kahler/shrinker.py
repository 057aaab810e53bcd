"""Self-shrinker residual, Gaussian area and critical points over families.

The Gaussian area of a closed surface is

    F = integral of exp(-|x|^2 / 2) dV,

and its first variation along a deformation field ``V`` is the classical

    dF(V) = -integral of <H + x_perp, V> exp(-|x|^2 / 2) dV,

so self-shrinkers (``H = -x_perp``) are exactly its critical points.  The
optimizer looks for zeros of the parameter gradient of F, because
shrinkers may be maxima or saddles of F rather than minima.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import catalog
from .calculus import make_grid
from .errors import NonConvergenceError, ParamError, UnsupportedDomainError
from .geometry import LocalGeometry, _normalize_point, dot, immersion_jets

DEFAULT_FD_STEP = 1e-5


def shrinker_residual(spec, p):
    """``R = H + x_perp`` (ambient, shape ``(4, ...)``) and its norm."""
    L = LocalGeometry(spec, _normalize_point(p))
    R = L.H.value + L.x_perp.value
    return R, np.sqrt(dot(R, R))


# ------------------------------------------------------------------ families
@dataclass(frozen=True)
class FamilySpec:
    """Parametric family ``params -> ImmersionSpec`` with a box of valid parameters."""

    name: str
    builder: Callable
    lower: tuple
    upper: tuple
    default: tuple
    param_names: tuple = ()

    @property
    def dim(self):
        return len(self.lower)

    def project(self, params, margin=0.0):
        """Clip into the box, optionally kept ``margin`` away from its faces."""
        lo = np.asarray(self.lower, float) + margin
        hi = np.asarray(self.upper, float) - margin
        return np.clip(np.asarray(params, float), lo, hi)

    def check(self, params):
        params = np.asarray(params, float)
        if params.shape != (self.dim,):
            raise ParamError(f"family {self.name} takes {self.dim} parameters, got {params.size}")
        if np.any(params < np.asarray(self.lower) - 1e-15) or np.any(params > np.asarray(self.upper) + 1e-15):
            raise ParamError(f"parameters {params.tolist()} outside the box of {self.name}")
        return params

    def build(self, params):
        spec = self.builder(*self.check(params))
        if not spec.closed:
            raise UnsupportedDomainError(f"family {self.name} must produce closed surfaces")
        return spec


def product_family():
    """Tori ``(r e^{iu}, s e^{iv})``; the only critical point is r = s = 1."""
    return FamilySpec("product", lambda r, s: catalog.product_torus(r, s),
                      (0.05, 0.05), (5.0, 5.0), (1.0, 1.0), ("r", "s"))


def scaling_family():
    """Scaled Clifford tori ``r (e^{iu}, e^{iv})``; F = 4 pi^2 r^2 exp(-r^2)."""
    return FamilySpec("scaling", lambda r: catalog.product_torus(r, r),
                      (0.05,), (5.0,), (1.0,), ("r",))


FOURIER_MODES = ((1, 0, 1, 0.0), (2, 1, 0, 0.5))


def fourier_family(modes=FOURIER_MODES, bound=0.09):
    """Perturbed tori with one free amplitude per ``(component, m, n, phase)`` mode."""
    if bound * len(modes) >= catalog.MAX_PERTURBATION:
        raise ParamError("fourier family box allows perturbations that are too large")

    def builder(*amps):
        return catalog.perturbed_torus(tuple((k, m, n, a, ph)
                                             for (k, m, n, ph), a in zip(modes, amps)))

    k = len(modes)
    return FamilySpec("fourier", builder, (-bound,) * k, (bound,) * k, (0.0,) * k,
                      tuple(f"a{i}" for i in range(k)))


FAMILIES = {"product": product_family, "scaling": scaling_family, "fourier": fourier_family}


def get_family(name):
    if name not in FAMILIES:
        raise ParamError(f"unknown family {name!r}; known: {', '.join(FAMILIES)}")
    return FAMILIES[name]()


# ------------------------------------------------------------------ functional
def _default_grid(spec, grid):
    return make_grid(spec, 64, 64) if grid is None else grid


def gaussian_area_spec(spec, grid=None):
    """``F = sum w exp(-|x|^2/2) sqrt(det g)`` over the nodes of ``grid``."""
    grid = _default_grid(spec, grid)
    u, v, w = grid.points()
    X = immersion_jets(spec, (u, v), order=1)
    xu, xv = X.du().value, X.dv().value
    g11, g12, g22 = dot(xu, xu), dot(xu, xv), dot(xv, xv)
    x = X.value
    return float(np.sum(w * np.exp(-0.5 * dot(x, x)) * np.sqrt(g11 * g22 - g12 * g12)))


def gaussian_area(family, params, grid=None):
    spec = family.build(params)
    if grid is not None and not hasattr(grid, "points"):
        grid = make_grid(spec, *grid)
    return gaussian_area_spec(spec, grid)


def family_gradient(family, params, grid=None, step=DEFAULT_FD_STEP):
    """Central-difference gradient of F in parameter space."""
    params = np.asarray(params, float)
    grad = np.empty(family.dim)
    for k in range(family.dim):
        d = np.zeros(family.dim)
        d[k] = step
        grad[k] = (gaussian_area(family, params + d, grid)
                   - gaussian_area(family, params - d, grid)) / (2 * step)
    return grad


def _fd_hessian(family, params, grid, step, h_step):
    n = family.dim
    Hm = np.empty((n, n))
    for k in range(n):
        d = np.zeros(n)
        d[k] = h_step
        Hm[:, k] = (family_gradient(family, params + d, grid, step)
                    - family_gradient(family, params - d, grid, step)) / (2 * h_step)
    return 0.5 * (Hm + Hm.T)


def first_variation_residual(family, params, direction, grid=None, step=DEFAULT_FD_STEP):
    """Disagreement between the FD derivative of F and the first-variation integral.

    Returns ``|dF/dt - (-int <H + x_perp, V> w dV)|`` with ``V`` the
    variation field of the immersion along ``direction`` (itself by
    central differences).
    """
    params = np.asarray(params, float)
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    spec = family.build(params)
    grid = _default_grid(spec, grid)
    u, v, w = grid.points()
    plus, minus = family.build(params + step * d), family.build(params - step * d)
    V = (plus.point((u, v)) - minus.point((u, v))) / (2 * step)
    L = LocalGeometry(spec, (u, v))
    R = L.H.value + L.x_perp.value
    x = L.X.value
    dens = w * np.exp(-0.5 * dot(x, x)) * L.sqrt_det_g.value
    analytic = -float(np.sum(dens * dot(R, V)))
    numeric = (gaussian_area_spec(plus, grid) - gaussian_area_spec(minus, grid)) / (2 * step)
    return abs(numeric - analytic)


# ------------------------------------------------------------------ optimizer
@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`find_critical`.

    ``mode="stationary"`` runs projected gradient descent with Armijo
    backtracking on ``|grad F|^2``.  ``mode="ascent"`` first climbs F with
    the same line search and then finishes like ``stationary``; use it
    when the start lies in the basin of a degenerate stationary point on
    the box boundary (F and its gradient both vanish as a torus shrinks
    to a point or escapes to infinity).
    """

    max_iter: int = 200
    tol: float = 1e-7
    fd_step: float = DEFAULT_FD_STEP
    hessian_step: float = 1e-4
    shrink: float = 0.5
    armijo: float = 1e-4
    initial_step: float = 1.0
    max_step: float = 0.25
    switch_tol: float = 1e-3
    grid: tuple = (64, 64)
    mode: str = "stationary"

    def __post_init__(self):
        if not 0 < self.shrink < 1:
            raise ParamError("shrink factor must lie in (0, 1)")
        for name in ("max_iter", "tol", "fd_step", "hessian_step", "armijo", "initial_step",
                     "max_step", "switch_tol"):
            if not getattr(self, name) > 0:
                raise ParamError(f"{name} must be positive")
        if self.mode not in ("stationary", "ascent"):
            raise ParamError(f"unknown optimizer mode {self.mode!r}")


@dataclass
class OptimizerResult:
    params: np.ndarray
    grad_norm: float
    objective: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)
    family: str = ""
    mode: str = "stationary"

    def as_dict(self):
        return {"family": self.family, "mode": self.mode, "params": self.params.tolist(),
                "grad_norm": self.grad_norm, "objective": self.objective,
                "iterations": self.iterations, "converged": self.converged,
                "trace": self.trace}


def find_critical(family, init, config=OptimizerConfig(), strict=False):
    """Search for a critical point of the Gaussian area within ``family``.

    Converged iff ``|grad F| < config.tol``.  Iterates are projected onto
    the family's box (kept a stencil width away from its faces) and no
    step is longer than ``config.max_step``.  In ``ascent`` mode the
    search climbs F until ``|grad F| < config.switch_tol`` (or the F line
    search stalls in round-off) and then finishes with the stationary
    iteration.  Each trace entry records the phase that produced it.

    The result is returned even without convergence; with ``strict=True``
    a :class:`NonConvergenceError` carrying it is raised instead.
    """
    margin = 1.01 * (config.fd_step + config.hessian_step)
    x = family.project(family.check(init), margin)
    grid = make_grid(family.build(x), *config.grid)

    def F(p):
        return gaussian_area(family, p, grid)

    def grad(p):
        return family_gradient(family, p, grid, config.fd_step)

    g = grad(x)
    f = F(x)
    phase = "ascent" if config.mode == "ascent" else "stationary"
    trace = [{"params": x.tolist(), "F": f, "grad_norm_sq": float(g @ g), "phase": phase}]
    t = config.initial_step
    it = 0
    while float(np.sqrt(g @ g)) >= config.tol and it < config.max_iter:
        if phase == "ascent" and float(np.sqrt(g @ g)) < config.switch_tol:
            phase, t = "stationary", config.initial_step
        it += 1
        if phase == "ascent":
            direction, merit = g, -f
        else:
            Hm = _fd_hessian(family, x, grid, config.fd_step, config.hessian_step)
            direction, merit = -2.0 * Hm @ g, float(g @ g)
        dnorm = float(np.linalg.norm(direction))
        t = min(t * 4.0, config.max_step / dnorm) if dnorm > 0 else 0.0
        accepted = False
        while t > 1e-16:
            trial = family.project(x + t * direction, margin)
            step = trial - x
            g_trial = grad(trial)
            if phase == "ascent":
                f_trial = F(trial)
                m_trial = -f_trial
            else:
                m_trial = float(g_trial @ g_trial)
            decrease = config.armijo * abs(float(step @ direction))
            if np.any(step != 0) and m_trial <= merit - decrease:
                accepted = True
                break
            t *= config.shrink
        if not accepted:
            if phase == "ascent":
                phase, t = "stationary", config.initial_step
                continue
            break
        x, g = trial, g_trial
        f = f_trial if phase == "ascent" else F(x)
        trace.append({"params": x.tolist(), "F": f, "grad_norm_sq": float(g @ g),
                      "phase": phase})
    gn = float(np.sqrt(g @ g))
    result = OptimizerResult(x, gn, f, it, gn < config.tol, trace, family.name, config.mode)
    if strict and not result.converged:
        raise NonConvergenceError(
            f"no critical point within {config.max_iter} iterations (|grad F| = {gn:.3g})", result)
    return result


def critical_radius_scan(family, lo, hi, n=401, grid=None):
    """1-D oracle: parameter of maximal F on a uniform scan of ``[lo, hi]``."""
    rs = np.linspace(lo, hi, n)
    vals = [gaussian_area(family, (r,), grid) for r in rs]
    return float(rs[int(np.argmax(vals))]), vals


__all__ = ["shrinker_residual", "FamilySpec", "product_family", "scaling_family",
           "fourier_family", "get_family", "gaussian_area", "gaussian_area_spec",
           "family_gradient", "first_variation_residual", "OptimizerConfig",
           "OptimizerResult", "find_critical", "critical_radius_scan"]
