"""
Two flat-angle examples: the Lagrangian catenoid and a tilted plane
===================================================================

The catenoid z_k = u_k + i u_k / |u|^2 is special Lagrangian (eta = 1,
minimal); the plane z1 = u cos t1 + i v cos t2, z2 = -v sin t2 - i u sin t1
has constant Kähler angle t1 + t2.
"""

import math

import numpy as np

from kahler import calculus, catalog, lagrangian
from kahler.analysis import surface_data
from kahler.errors import DomainError

catenoid = catalog.lagrangian_catenoid(0.5, 2.0)

# the chart is the punctured plane; quadrature runs over an annulus in polar form
grid = calculus.make_grid(catenoid, 64, 64)
print(grid.describe())
u, v, _ = grid.points()
data = surface_data(catenoid, (u, v))
print("max |eta - 1|  ", np.abs(data.eta_re + 1j * data.eta_im - 1).max())
print("max |H|        ", np.sqrt((data.H_ambient**2).sum(0)).max())

# the origin is not part of the surface
try:
    surface_data(catenoid, (0.0, 0.0))
except DomainError as exc:
    print("at the origin: ", exc)

# the loop around the puncture does not see any Maslov class
res = lagrangian.maslov_index(catenoid, lagrangian.parse_loop("circle:0,0,1", catenoid))
print("winding around the puncture", res.winding)

# weighted area over growing annuli [1/R, R]: the weight decays at both ends
for R in (2, 4, 8):
    spec = catalog.lagrangian_catenoid(1 / R, R)
    F = calculus.weighted_integral(spec, "1", calculus.make_grid(spec, 200, 64))
    print(f"R = {R}: F = {F:.12f}")

plane = catalog.constant_angle_plane(math.pi / 6, math.pi / 6)
pdata = surface_data(plane, (np.array([0.0, 3.0, -2.0]), np.array([0.0, 1.0, 5.0])))
print("plane cos(theta)", pdata.cos_theta, " beta", pdata.beta, " max |h|", np.abs(pdata.h).max())
