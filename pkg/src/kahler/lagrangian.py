"""Holomorphic-volume density, Lagrangian angle, Maslov form and loop windings.

For an immersion ``x`` the pull-back of ``Omega = dz1 ^ dz2`` is a complex
multiple ``eta`` of the area form; ``|eta| = sin(theta)`` and where it does
not vanish its argument is the Lagrangian angle ``beta``.  ``beta`` is only
defined modulo ``2 pi``, so it is exposed as a principal value and through
path integrals of ``d beta`` (the Maslov form is ``alpha = -d beta``).
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import expr as _expr
from . import jets
from .errors import NonConvergenceError, ParamError, UndefinedAngleError
from .geometry import LocalGeometry, _normalize_point, holomorphic_volume, immersion_jets

#: |eta| below this means beta is undefined (a complex point).
EPS_ETA = 1e-8
MAX_LOOP_SAMPLES = 2**20


@dataclass(frozen=True)
class EtaValue:
    re: np.ndarray
    im: np.ndarray

    @property
    def modulus(self):
        return np.hypot(self.re, self.im)

    @property
    def theta_from_eta(self):
        """Kähler angle in [0, pi/2] recovered from ``|eta| = sin(theta)``.

        The sign of cos(theta) is not visible in ``eta``; use
        :func:`kahler.geometry.kahler_cos` to tell theta from pi - theta.
        """
        return np.arcsin(np.clip(self.modulus, 0.0, 1.0))


@dataclass(frozen=True)
class MaslovSample:
    alpha_u: np.ndarray
    alpha_v: np.ndarray
    beta_principal: np.ndarray


def eta(X, ff=None):
    """Values of ``eta = Omega(x_u, x_v) / sqrt(det g)`` from a vector jet."""
    xu, xv = X.du().value, X.dv().value
    if ff is None:
        g11, g12, g22 = (xu * xu).sum(0), (xu * xv).sum(0), (xv * xv).sum(0)
        sqrt_det = np.sqrt(g11 * g22 - g12 * g12)
    else:
        sqrt_det = ff.sqrt_det_g
    re, im = holomorphic_volume(xu, xv)
    return EtaValue(re / sqrt_det, im / sqrt_det)


def eta_at(spec, p):
    return eta(immersion_jets(spec, p, order=1))


def _require_eta(modulus, eps):
    if np.any(modulus < eps):
        raise UndefinedAngleError(
            f"|eta| = {np.min(modulus):.3g} < {eps:g}: Lagrangian angle undefined at a complex point")


def lagrangian_angle(value, eps=EPS_ETA):
    """Principal Lagrangian angle ``arg(eta)`` in ``(-pi, pi]``."""
    _require_eta(value.modulus, eps)
    beta = np.arctan2(value.im, value.re)
    return np.where(beta <= -math.pi, beta + 2 * math.pi, beta)


def d_beta_jets(L):
    """Coordinate components of d(beta) as jets, from ``Im(d eta / eta)``."""
    re, im = L.eta
    mod2 = re * re + im * im
    return [(re * d(im) - im * d(re)) / mod2 for d in (lambda f: f.du(), lambda f: f.dv())]


def maslov_form(X=None, ff=None, *, geometry=None, eps=EPS_ETA):
    """Maslov form ``alpha = -d beta`` in the coordinate cobasis (du, dv).

    Pass either the vector jet ``X`` (order >= 2) or a
    :class:`~kahler.geometry.LocalGeometry`.
    """
    if geometry is None:
        geometry = _GeometryView(X)
    re, im = geometry.eta
    value = EtaValue(re.value, im.value)
    beta = lagrangian_angle(value, eps)
    db = d_beta_jets(geometry)
    return MaslovSample(-db[0].value, -db[1].value, beta)


class _GeometryView:
    """Just enough of LocalGeometry for eta jets built from a bare X."""

    def __init__(self, X):
        Xu, Xv = X.du(), X.dv()
        g11, g12, g22 = (Xu * Xu).sum(0), (Xu * Xv).sum(0), (Xv * Xv).sum(0)
        sd = jets.sqrt(g11 * g22 - g12 * g12)
        re, im = holomorphic_volume(Xu, Xv)
        self.eta = (re / sd, im / sd)


def maslov_at(spec, p, eps=EPS_ETA):
    return maslov_form(geometry=LocalGeometry(spec, p), eps=eps)


def closedness_residual(spec, p):
    """``|d_v alpha_u - d_u alpha_v|`` at ``p`` (needs order-3 jets)."""
    L = LocalGeometry(spec, p)
    _require_eta(np.hypot(L.eta[0].value, L.eta[1].value), EPS_ETA)
    db = d_beta_jets(L)
    return np.abs(db[0].dv().value - db[1].du().value)


# ------------------------------------------------------------------ loops
@dataclass(frozen=True)
class LoopSpec:
    """Closed curve ``t in [0, 1] -> (u(t), v(t))`` in the parameter domain.

    ``curve`` takes and returns numpy arrays; ``samples`` is the initial
    sample count (refined adaptively by :func:`maslov_index`).
    """

    curve: Callable
    samples: int = 64
    name: str = "loop"

    def __post_init__(self):
        if self.samples < 16:
            raise ParamError(f"loops need at least 16 samples, got {self.samples}")


@dataclass(frozen=True)
class MaslovResult:
    winding: int
    raw: float
    samples: int
    loop: str


def _check_closed(spec, loop):
    ends = loop.curve(np.array([0.0, 1.0]))
    gap = []
    for k, per in enumerate(spec.periods()):
        d = float(ends[k][1] - ends[k][0])
        if per:
            d = d - per * round(d / per)
        gap.append(abs(d))
    if max(gap) > 1e-9:
        raise ParamError(f"loop {loop.name!r} is not closed (endpoint gap {max(gap):.3g})")


def maslov_index(spec, loop, eps=EPS_ETA, max_samples=MAX_LOOP_SAMPLES):
    """Winding of the Maslov form along ``loop``: ``(1/2pi) * integral of alpha``.

    The argument of ``eta`` is unwrapped along the sampled loop; the sample
    count doubles until every step changes the phase by less than pi/2.

    Raises
    ------
    UndefinedAngleError
        If ``|eta| < eps`` somewhere on the samples.
    NonConvergenceError
        If more than ``max_samples`` samples would be needed.
    """
    _check_closed(spec, loop)
    n = loop.samples
    while True:
        t = np.linspace(0.0, 1.0, n + 1)
        u, v = loop.curve(t)
        value = eta_at(spec, (u, v))
        _require_eta(value.modulus, eps)
        phase = np.arctan2(value.im, value.re)
        steps = np.angle(np.exp(1j * np.diff(phase)))
        if np.max(np.abs(steps)) < math.pi / 2:
            break
        n *= 2
        if n > max_samples:
            raise NonConvergenceError(
                f"phase of eta still jumps by {np.max(np.abs(steps)):.3g} with {n // 2} samples")
    raw = -float(np.sum(steps)) / (2 * math.pi)
    return MaslovResult(int(round(raw)), raw, n, loop.name)


def parse_loop(text, spec, samples=64):
    """Loop from its CLI description.

    Accepted forms: ``u-loop`` / ``v-loop`` (the other coordinate at the low
    end of its domain, or ``u-loop@c`` to fix it at ``c``),
    ``circle:u0,v0,r`` and ``u(t);v(t)`` expressions in ``t`` on [0, 1].
    """
    text = text.strip()
    head, _, at = text.partition("@")
    if head in ("u-loop", "v-loop"):
        k = 0 if head == "u-loop" else 1
        (lo, hi), per = spec.domain[k], spec.periodic[k]
        if not per:
            raise ParamError(f"{head} needs a periodic {'uv'[k]} direction")
        other_lo = spec.domain[1 - k][0]
        fixed = _expr.eval_constant(at) if at else (other_lo if math.isfinite(other_lo) else 0.0)

        def curve(t):
            run = lo + (hi - lo) * t
            const = np.full_like(run, fixed)
            return (run, const) if k == 0 else (const, run)

        return LoopSpec(curve, samples, text)
    if text.startswith("circle:"):
        parts = text[len("circle:"):].split(",")
        if len(parts) != 3:
            raise ParamError("circle loops take u0,v0,r")
        u0, v0, r = (_expr.eval_constant(s) for s in parts)

        def curve(t):
            a = 2 * math.pi * t
            return u0 + r * np.cos(a), v0 + r * np.sin(a)

        return LoopSpec(curve, samples, text)
    if ";" in text:
        su, sv = text.split(";", 1)
        au = _expr.parse(su, variables=("t",))
        av = _expr.parse(sv, variables=("t",))

        def curve(t):
            env = {"t": np.asarray(t, dtype=float)}
            u = np.broadcast_to(_expr.evaluate(au, env), np.shape(t)).astype(float)
            v = np.broadcast_to(_expr.evaluate(av, env), np.shape(t)).astype(float)
            return u, v

        return LoopSpec(curve, samples, text)
    raise ParamError(f"unrecognised loop {text!r}; use u-loop, v-loop, circle:u0,v0,r or 'u(t);v(t)'")


def principal_beta(spec, p, eps=EPS_ETA):
    return lagrangian_angle(eta_at(spec, _normalize_point(p)), eps)
