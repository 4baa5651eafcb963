"""Dense matrix helpers and uniform sampling on the unit sphere.

Matrices are plain ``numpy`` arrays.  Functions accept a single ``(d, d)``
matrix or a stack ``(n, d, d)``; vectors are ``(d,)`` or ``(n, d)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "sample_uniform_sphere",
    "dot",
    "complete_orthogonal",
    "matmul",
    "matrix_power",
    "orthogonality_defect",
]

UNIT_TOL = 1e-10
_REFLECT_SHORTCUT = 1e-12


def _as_square(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def sample_uniform_sphere(d, rng, size=None):
    """Uniform point(s) on the unit sphere in R^d, by normalizing Gaussian vectors.

    Returns shape ``(d,)`` when ``size`` is None, else ``(size, d)``.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {d!r}")
    d = int(d)
    n = 1 if size is None else int(size)
    z = rng.normal((n, d))
    sq = np.einsum("ij,ij->i", z, z)
    bad = sq == 0.0
    while np.any(bad):
        z[bad] = rng.normal((int(bad.sum()), d))
        sq = np.einsum("ij,ij->i", z, z)
        bad = sq == 0.0
    u = z / np.sqrt(sq)[:, None]
    return u[0] if size is None else u


def dot(u, v):
    """Inner product along the last axis."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != v.shape[-1]:
        raise ValueError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    out = np.einsum("...i,...i->...", u, v)
    return float(out) if out.ndim == 0 else out


def complete_orthogonal(w):
    """Orthogonal matrix whose first column is the unit vector ``w``.

    Uses the Householder reflector ``I - 2 v v' / v'v`` with ``v = e1 - w``,
    which sends e1 to w.  When w is within 1e-12 of e1 the identity is
    returned.  A stack of vectors ``(n, d)`` gives a stack ``(n, d, d)``.
    """
    w = np.asarray(w, dtype=float)
    norms = np.linalg.norm(w, axis=-1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ValueError("complete_orthogonal needs a unit vector (|norm - 1| <= 1e-10)")
    d = w.shape[-1]
    v = -w.copy()
    v[..., 0] += 1.0
    vv = np.einsum("...i,...i->...", v, v)
    near = np.sqrt(vv) < _REFLECT_SHORTCUT
    scale = np.where(near, 0.0, 2.0 / np.where(near, 1.0, vv))
    return np.eye(d) - scale[..., None, None] * v[..., :, None] * v[..., None, :]


def matmul(a, b):
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return a @ b


def matrix_power(a, k):
    """``a**k`` by repeated multiplication; ``a**0`` is the identity."""
    if int(k) != k or k < 0:
        raise ValueError(f"power must be a non-negative integer, got {k!r}")
    a = _as_square(a)
    out = np.broadcast_to(np.eye(a.shape[-1]), a.shape).copy()
    for _ in range(int(k)):
        out = out @ a
    return out


def orthogonality_defect(a):
    """Max-norm of ``a'a - I``; an array of defects for a stack of matrices."""
    a = _as_square(a)
    gram = np.swapaxes(a, -1, -2) @ a
    out = np.max(np.abs(gram - np.eye(a.shape[-1])), axis=(-2, -1))
    return float(out) if out.ndim == 0 else out
