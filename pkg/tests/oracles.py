"""Brute-force finite-difference geometry built only from ``spec.point``.

Nothing here touches jets, so agreement with the library is an
independent check of the jet-based formulas.
"""

import numpy as np

J = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)


def position(spec, u, v):
    return np.asarray(spec.point((u, v)), float)


def first_derivs(spec, u, v, h=1e-5):
    xu = (position(spec, u + h, v) - position(spec, u - h, v)) / (2 * h)
    xv = (position(spec, u, v + h) - position(spec, u, v - h)) / (2 * h)
    return xu, xv


def second_derivs(spec, u, v, h=1e-4):
    x = position(spec, u, v)
    xuu = (position(spec, u + h, v) - 2 * x + position(spec, u - h, v)) / h**2
    xvv = (position(spec, u, v + h) - 2 * x + position(spec, u, v - h)) / h**2
    xuv = (position(spec, u + h, v + h) - position(spec, u + h, v - h)
           - position(spec, u - h, v + h) + position(spec, u - h, v - h)) / (4 * h**2)
    return xuu, xuv, xvv


def metric(spec, u, v):
    xu, xv = first_derivs(spec, u, v)
    return np.array([[xu @ xu, xu @ xv], [xu @ xv, xv @ xv]])


def tangent_frame(spec, u, v):
    """Gram-Schmidt of (x_u, x_v)."""
    xu, xv = first_derivs(spec, u, v)
    e1 = xu / np.linalg.norm(xu)
    w = xv - (xv @ e1) * e1
    return e1, w / np.linalg.norm(w)


def cos_theta(spec, u, v):
    e1, e2 = tangent_frame(spec, u, v)
    return (J @ e1) @ e2


def normal_projector(spec, u, v):
    e1, e2 = tangent_frame(spec, u, v)
    return np.eye(4) - np.outer(e1, e1) - np.outer(e2, e2)


def second_form(spec, u, v):
    """Normal parts of x_ij in coordinates, plus the inverse metric."""
    P = normal_projector(spec, u, v)
    xuu, xuv, xvv = second_derivs(spec, u, v)
    II = np.array([[P @ xuu, P @ xuv], [P @ xuv, P @ xvv]])
    return II, np.linalg.inv(metric(spec, u, v))


def mean_curvature(spec, u, v):
    II, gi = second_form(spec, u, v)
    return np.einsum("ij,ijk->k", gi, II)


def norm_h_sq(spec, u, v):
    II, gi = second_form(spec, u, v)
    return float(np.einsum("ik,jl,ija,kla->", gi, gi, II, II))


def laplacian(spec, f, u, v, h=1e-3):
    """Divergence form with nested central differences."""

    def flux(uu, vv, k):
        g = metric(spec, uu, vv)
        gi = np.linalg.inv(g)
        s = np.sqrt(np.linalg.det(g))
        e = 1e-5
        df = np.array([(f(uu + e, vv) - f(uu - e, vv)) / (2 * e),
                       (f(uu, vv + e) - f(uu, vv - e)) / (2 * e)])
        return s * (gi[k] @ df)

    s0 = np.sqrt(np.linalg.det(metric(spec, u, v)))
    div = ((flux(u + h, v, 0) - flux(u - h, v, 0)) / (2 * h)
           + (flux(u, v + h, 1) - flux(u, v - h, 1)) / (2 * h))
    return div / s0


def adapted_frame(spec, u, v):
    e1, e2 = tangent_frame(spec, u, v)
    c = (J @ e1) @ e2
    s = np.sqrt(1 - c * c)
    return e1, e2, (J @ e1 - c * e2) / s, (J @ e2 + c * e1) / s


def j_m(spec, u, v):
    e1, e2, e3, e4 = adapted_frame(spec, u, v)
    return (np.outer(e2, e1) - np.outer(e1, e2) - np.outer(e4, e3) + np.outer(e3, e4))


def dbar_jm_sq(spec, u, v, h=1e-5):
    """``sum_i |D_{e_i} J_M|^2`` (Frobenius), by differencing J_M along e_i."""
    g = metric(spec, u, v)
    # coordinate directions of the Gram-Schmidt frame
    a = 1 / np.sqrt(g[0, 0])
    sd = np.sqrt(np.linalg.det(g))
    dirs = [(a, 0.0), (-g[0, 1] / (np.sqrt(g[0, 0]) * sd), np.sqrt(g[0, 0]) / sd)]
    total = 0.0
    for du, dv in dirs:
        d = (j_m(spec, u + h * du, v + h * dv) - j_m(spec, u - h * du, v - h * dv)) / (2 * h)
        total += float(np.sum(d * d))
    return total
