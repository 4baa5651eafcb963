"""North-pole functionals U_k = e1' G^k e1 of a Haar matrix G.

Two routes to the law of U_k:

* direct: draw Haar matrices and read off the (1,1) entry of G^k, any k >= 1;
* exact representations for k <= 3, as deterministic kernels of
  independent draws xi_i ~ f(.|p+1-i):

      U_1 = xi1
      U_2 = xi1^2 + (1 - xi1^2) xi2
      U_3 = xi1^3 + 2 xi1 (1 - xi1^2) xi2
            + (1 - xi1^2) (-xi1 xi2^2 + (1 - xi2^2) xi3)

The block identities ``u2_identity`` / ``u3_identity`` express U_2 and U_3
of a fixed matrix through its :class:`~northpole.haar.GammaPartition` and
hold to rounding error for every matrix with |g11| < 1.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .densities import sample_f
from .haar import ORTHO_TOL, QR, haar_batches
from .linalg import dot, matrix_power, orthogonality_defect

__all__ = [
    "EXACT_MAX_K",
    "XiTriple",
    "u_k_direct",
    "u2_identity",
    "u3_identity",
    "u2_kernel",
    "u3_kernel",
    "sample_xi",
    "sample_u1",
    "sample_u2",
    "sample_u3",
    "sample_u_exact",
    "sample_u_direct",
]

EXACT_MAX_K = 3


class XiTriple(NamedTuple):
    xi1: np.ndarray
    xi2: np.ndarray
    xi3: np.ndarray


def u_k_direct(g, k):
    """(1,1) entry of ``g**k``; works on a single matrix or a stack."""
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if np.any(orthogonality_defect(g) > ORTHO_TOL):
        raise ValueError("u_k_direct needs an orthogonal matrix (defect <= 1e-10)")
    out = matrix_power(g, k)[..., 0, 0]
    return float(out) if np.ndim(out) == 0 else out


def u2_identity(part):
    g11 = np.asarray(part.gamma11)
    out = g11 ** 2 + (1.0 - g11 ** 2) * dot(part.w2, part.w1)
    return float(out) if np.ndim(out) == 0 else out


def u3_identity(part):
    g11 = np.asarray(part.gamma11)
    rest = 1.0 - g11 ** 2
    quad = np.einsum("...i,...ij,...j->...", part.w2, part.gamma22, part.w1)
    out = g11 ** 3 + 2.0 * g11 * rest * dot(part.w2, part.w1) + rest * quad
    return float(out) if np.ndim(out) == 0 else out


def u2_kernel(xi1, xi2):
    """``xi1^2 + (1 - xi1^2) xi2``: a convex combination of 1 and xi2."""
    w = np.square(xi1)
    return w + (1.0 - w) * xi2


def u3_kernel(xi1, xi2, xi3):
    w = np.square(xi1)
    c = np.square(xi2)
    return xi1 * w + 2.0 * xi1 * (1.0 - w) * xi2 + (1.0 - w) * (-xi1 * c + (1.0 - c) * xi3)


def _check_p(p, minimum):
    if int(p) != p or p < minimum:
        raise ValueError(f"p must be an integer >= {minimum}, got {p!r}")
    return int(p)


def sample_xi(p, rng, size=None):
    """Independent (xi1, xi2, xi3) with xi_i ~ f(.|p+1-i).

    At p = 3 the third member is f(.|1), i.e. +-1 with probability 1/2.
    """
    p = _check_p(p, 3)
    return XiTriple(sample_f(p, rng, size), sample_f(p - 1, rng, size), sample_f(p - 2, rng, size))


def sample_u1(p, rng, size=None):
    return sample_f(_check_p(p, 2), rng, size)


def sample_u2(p, rng, size=None, kernel=u2_kernel):
    """Draw U_2 from its exact representation.

    ``kernel`` is swappable so that mutated kernels can be pushed through the
    same verification path.
    """
    p = _check_p(p, 3)
    xi1 = sample_f(p, rng, size)
    xi2 = sample_f(p - 1, rng, size)
    out = kernel(xi1, xi2)
    return float(out) if size is None else out


def sample_u3(p, rng, size=None, kernel=u3_kernel):
    out = kernel(*sample_xi(p, rng, size))
    return float(out) if size is None else out


def sample_u_exact(k, p, rng, size=None):
    """Dispatch to the exact representation sampler for k in {1, 2, 3}."""
    if k == 1:
        return sample_u1(p, rng, size)
    if k == 2:
        return sample_u2(p, rng, size)
    if k == 3:
        return sample_u3(p, rng, size)
    raise ValueError(f"no exact representation for k={k}; use --method direct")


def sample_u_direct(ks, p, n, rng, method=QR, sampler=None, base=None):
    """U_k for each k in ``ks`` computed from the same ``n`` Haar draws.

    Parameters
    ----------
    ks : iterable of int
    p, n : int
    rng : RngStream
    method : {"qr", "decomposition"}
    sampler : callable, optional
        Replacement Haar sampler ``(p, rng, size)``, see
        :func:`~northpole.haar.haar_batches`.
    base : array_like, optional
        Unit vector y; when given, returns y' G^k y instead of the (1,1)
        entry.

    Returns
    -------
    dict
        ``{k: ndarray of shape (n,)}`` plus ``"defect"``, the worst
        orthogonality defect seen.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("powers must be positive integers")
    out = {k: [] for k in ks}
    worst = 0.0
    y = None if base is None else np.asarray(base, dtype=float)
    for gs in haar_batches(p, n, rng, method=method, sampler=sampler):
        worst = max(worst, float(np.max(orthogonality_defect(gs))))
        power = gs
        for k in range(1, ks[-1] + 1):
            if k > 1:
                power = power @ gs
            if k in out:
                if y is None:
                    out[k].append(power[:, 0, 0].copy())
                else:
                    out[k].append(np.einsum("i,nij,j->n", y, power, y))
    result = {k: np.concatenate(v) for k, v in out.items()}
    result["defect"] = worst
    return result
