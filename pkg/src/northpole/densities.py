"""The coordinate density f(.|p) of a uniform point on the unit sphere in R^p.

``f(x|p) = G(p/2) / (G(1/2) G((p-1)/2)) * (1 - x^2)^((p-3)/2)`` on (-1, 1),
with ``G`` the gamma function.  ``p = 2`` is the arcsine law, ``p = 3`` is
uniform, and ``p = 1`` degenerates to a fair coin on {-1, +1}.  The square of
such a coordinate is Beta(1/2, (p-1)/2) distributed.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

__all__ = [
    "ConvergenceError",
    "log_norm_const",
    "norm_const",
    "density_f",
    "cdf_f",
    "sample_f",
    "beta_density_g0",
    "beta_cdf_g0",
    "regularized_incomplete_beta",
    "normal_cdf",
]

_BETACF_EPS = 1e-15
_BETACF_MAX_ITER = 500
_TINY = 1e-300
# math.gamma overflows just above 171
_DIRECT_GAMMA_MAX_P = 340
# normals per chunk when sampling, bounds peak memory at ~32 MB
_CHUNK_ELEMENTS = 1 << 22


class ConvergenceError(ArithmeticError):
    pass


def _check_dim(p, minimum=1):
    if int(p) != p or p < minimum:
        raise ValueError(f"dimension parameter p must be an integer >= {minimum}, got {p!r}")
    return int(p)


def _scalar_or_array(values, like):
    if np.ndim(like) == 0:
        return float(values[()]) if isinstance(values, np.ndarray) else float(values)
    return values


def log_norm_const(p):
    """Log of the normalizing constant G(p/2) / (G(1/2) G((p-1)/2))."""
    p = _check_dim(p, 2)
    return math.lgamma(p / 2) - math.lgamma(0.5) - math.lgamma((p - 1) / 2)


def norm_const(p):
    p = _check_dim(p, 2)
    if p <= _DIRECT_GAMMA_MAX_P:
        return math.gamma(p / 2) / (math.gamma(0.5) * math.gamma((p - 1) / 2))
    return math.exp(log_norm_const(p))


def density_f(x, p):
    """Evaluate f(x|p); zero outside (-1, 1).

    Raises
    ------
    ValueError
        For ``p = 1`` (point masses, no density) and for ``p = 2`` at
        ``|x| = 1`` where the arcsine density has a pole.
    """
    p = _check_dim(p)
    if p == 1:
        raise ValueError("degenerate density: f(.|1) is a pair of point masses at -1 and +1")
    xa = np.asarray(x, dtype=float)
    ax = np.abs(xa)
    if p == 2 and np.any(ax == 1.0):
        raise ValueError("pole at boundary: f(.|2) diverges at |x| = 1")
    inside = ax < 1.0
    out = np.zeros_like(xa)
    xi = xa[inside]
    # log1p(-x^2) loses nothing near 0 and keeps the large-p power stable
    out[inside] = norm_const(p) * np.exp(0.5 * (p - 3) * np.log1p(-xi * xi))
    return _scalar_or_array(out, x)


def cdf_f(x, p):
    """Cumulative distribution function of f(.|p).

    For ``p >= 2`` and ``x >= 0`` this is ``1/2 + I_{x^2}(1/2, (p-1)/2) / 2``;
    negative arguments use the reflection ``F(x) = 1 - F(-x)``.  For ``p = 1``
    it is the right-continuous step function with jumps of 1/2 at -1 and +1.
    """
    p = _check_dim(p)
    xa = np.asarray(x, dtype=float)
    if p == 1:
        out = np.where(xa < -1.0, 0.0, np.where(xa < 1.0, 0.5, 1.0))
        return _scalar_or_array(out, x)
    ax = np.minimum(np.abs(xa), 1.0)
    half_mass = 0.5 * regularized_incomplete_beta(ax * ax, 0.5, 0.5 * (p - 1))
    out = np.where(xa >= 0, 0.5 + half_mass, 0.5 - half_mass)
    return _scalar_or_array(np.asarray(out, dtype=float), x)


def sample_f(p, rng, size=None):
    """Draw from f(.|p) as ``Z_1 / |Z|`` for a vector Z of p iid standard normals.

    Parameters
    ----------
    p : int
        Dimension parameter, ``p >= 1``.  ``p = 1`` yields +-1 equiprobably.
    rng : RngStream
    size : int, optional
        Number of draws; a float is returned when omitted.
    """
    p = _check_dim(p)
    n = 1 if size is None else int(size)
    out = np.empty(n)
    rows = max(1, _CHUNK_ELEMENTS // p)
    start = 0
    while start < n:
        m = min(rows, n - start)
        z = rng.normal((m, p))
        sq = np.einsum("ij,ij->i", z, z)
        bad = sq == 0.0
        while np.any(bad):
            # an all-zero draw has probability zero; redraw just those rows
            z[bad] = rng.normal((int(bad.sum()), p))
            sq = np.einsum("ij,ij->i", z, z)
            bad = sq == 0.0
        out[start:start + m] = z[:, 0] / np.sqrt(sq)
        start += m
    np.clip(out, -1.0, 1.0, out=out)
    return float(out[0]) if size is None else out


def beta_density_g0(y, p):
    """Density of Beta(1/2, (p-1)/2), the law of the square of an f(.|p) draw."""
    p = _check_dim(p, 2)
    ya = np.asarray(y, dtype=float)
    inside = (ya > 0.0) & (ya < 1.0)
    out = np.zeros_like(ya)
    yi = ya[inside]
    out[inside] = norm_const(p) * np.exp(-0.5 * np.log(yi) + (0.5 * (p - 1) - 1) * np.log1p(-yi))
    return _scalar_or_array(out, y)


def beta_cdf_g0(y, p):
    """CDF of Beta(1/2, (p-1)/2), clamped to [0, 1] outside the support."""
    p = _check_dim(p, 2)
    ya = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    return _scalar_or_array(np.asarray(regularized_incomplete_beta(ya, 0.5, 0.5 * (p - 1))), y)


def _betacf(x, a, b):
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) < _BETACF_EPS):
            return h
    worst = float(np.max(np.abs(delta - 1.0)))
    raise ConvergenceError(
        f"incomplete beta continued fraction did not converge in {_BETACF_MAX_ITER} "
        f"iterations (a={a}, b={b}, max |delta-1|={worst:.3e})"
    )


def regularized_incomplete_beta(x, a, b):
    """Regularized incomplete beta function I_x(a, b).

    Evaluated by continued fraction on whichever side of
    ``x = (a+1)/(a+b+2)`` converges fastest, using
    ``I_x(a, b) = 1 - I_{1-x}(b, a)`` for the upper side.  Accepts arrays
    in ``x``; ``a`` and ``b`` are scalars.
    """
    if not (a > 0 and b > 0):
        raise ValueError(f"shape parameters must be positive, got a={a}, b={b}")
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)) or np.any(np.isnan(xa)):
        raise ValueError("x must lie in [0, 1]")
    a = float(a)
    b = float(b)
    out = np.empty_like(xa)
    out[xa == 0.0] = 0.0
    out[xa == 1.0] = 1.0
    interior = (xa > 0.0) & (xa < 1.0)
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    split = (a + 1.0) / (a + b + 2.0)

    lower = interior & (xa < split)
    if np.any(lower):
        xl = xa[lower]
        front = np.exp(a * np.log(xl) + b * np.log1p(-xl) - lbeta)
        out[lower] = front * _betacf(xl, a, b) / a

    upper = interior & (xa >= split)
    if np.any(upper):
        xu = xa[upper]
        front = np.exp(a * np.log(xu) + b * np.log1p(-xu) - lbeta)
        out[upper] = 1.0 - front * _betacf(1.0 - xu, b, a) / b

    np.clip(out, 0.0, 1.0, out=out)
    return _scalar_or_array(out, x)


def normal_cdf(x):
    """Standard normal CDF."""
    return _scalar_or_array(np.asarray(special.ndtr(np.asarray(x, dtype=float))), x)
