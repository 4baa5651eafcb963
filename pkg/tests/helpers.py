import math

import numpy as np
from scipy import integrate

from northpole.densities import density_f


def rotation(theta, p):
    """Planar rotation in the (1, 2) coordinates padded with the identity."""
    g = np.eye(p)
    c, s = math.cos(theta), math.sin(theta)
    g[:2, :2] = [[c, -s], [s, c]]
    return g


def quad_density(a, b, p):
    # x = sin(t) removes the endpoint singularity of f(.|2) and keeps quad accurate for all p
    def integrand(t):
        x = math.sin(t)
        if abs(x) == 1.0:
            # sin rounded onto the boundary; f(sin t) cos t tends to 1/pi for p = 2, else 0
            return 1 / math.pi if p == 2 else 0.0
        return density_f(x, p) * math.cos(t)

    if a == b:
        return 0.0
    val, _ = integrate.quad(integrand, math.asin(a), math.asin(b), epsabs=1e-13, epsrel=1e-13, limit=200)
    return val
