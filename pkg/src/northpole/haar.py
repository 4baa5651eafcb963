"""Haar-distributed random orthogonal matrices, generated two independent ways.

``sample_haar_qr`` orthogonalizes a Gaussian matrix and fixes the column
signs.  ``sample_haar_decomposition`` builds the matrix block by block from
its (1,1) entry, two uniform directions on S^{p-2} and a Haar matrix of size
p-2:

    G = [[g11,              s * u2'         ],
         [s * u1,   h1 diag(-g11, D) h2'    ]],    s = sqrt(1 - g11^2)

where ``h_i`` is an orthogonal matrix with first column ``u_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densities import sample_f
from .linalg import UNIT_TOL, complete_orthogonal, orthogonality_defect, sample_uniform_sphere

__all__ = [
    "ORTHO_TOL",
    "HaarSample",
    "GammaPartition",
    "OutsideOpPlusError",
    "sample_haar_qr",
    "sample_haar_decomposition",
    "assemble_gamma",
    "decompose_gamma",
    "haar_batches",
]

QR = "qr"
DECOMPOSITION = "decomposition"

ORTHO_TOL = 1e-10
# 1 - g11^2 below this is treated as |g11| = 1
_OP_PLUS_MARGIN = 1e-14
# matrix entries per batch, bounds peak memory of the stacked samplers
_BATCH_ELEMENTS = 1 << 20
_MAX_REDRAWS = 100


class OutsideOpPlusError(ValueError):
    """Raised when |g11| is numerically 1, a probability-zero event under Haar."""


@dataclass(frozen=True)
class HaarSample:
    """One matrix ``(p, p)`` or a stack ``(n, p, p)`` and the method that produced it."""

    gamma: np.ndarray
    method: str

    @property
    def defect(self):
        return orthogonality_defect(self.gamma)


@dataclass(frozen=True)
class GammaPartition:
    """Blocks of an orthogonal matrix split after the first row and column.

    ``w1`` and ``w2`` are the first column and first row (without the
    corner) rescaled to unit length.  All fields carry a leading batch axis
    when built from a stack.
    """

    gamma11: np.ndarray
    gamma21: np.ndarray
    gamma12_t: np.ndarray
    gamma22: np.ndarray
    w1: np.ndarray
    w2: np.ndarray

    def reassemble(self):
        g11 = np.asarray(self.gamma11)
        top = np.concatenate([g11[..., None], self.gamma12_t], axis=-1)
        bottom = np.concatenate([self.gamma21[..., :, None], self.gamma22], axis=-1)
        return np.concatenate([top[..., None, :], bottom], axis=-2)


def _check_p(p, minimum):
    if int(p) != p or p < minimum:
        raise ValueError(f"unsupported dimension p={p!r}: need an integer >= {minimum}")
    return int(p)


def _qr_stack(p, n, rng, sign_fix=True):
    z = rng.normal((n, p, p))
    q, r = np.linalg.qr(z)
    if not sign_fix:
        return q
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * np.sign(d)[:, None, :]


def sample_haar_qr(p, rng, size=None, sign_fix=True):
    """Haar matrix on O(p) from the QR factorization of a Gaussian matrix.

    The columns of Q are multiplied by the signs of diag(R) so that the
    factorization is unique; without that step the result is not Haar.
    Draws whose orthogonality defect exceeds 1e-10, or whose R has a zero
    diagonal entry, are redrawn.

    Parameters
    ----------
    p : int
    rng : RngStream
    size : int, optional
        Stack size; when omitted ``gamma`` is a single ``(p, p)`` matrix.
    sign_fix : bool
        Disable only to reproduce the classic biased sampler.
    """
    p = _check_p(p, 1)
    n = 1 if size is None else int(size)
    q = _qr_stack(p, n, rng, sign_fix)
    for _ in range(_MAX_REDRAWS):
        bad = orthogonality_defect(q) > ORTHO_TOL
        bad |= ~np.all(np.isfinite(q), axis=(-2, -1))
        if not np.any(bad):
            break
        q[bad] = _qr_stack(p, int(bad.sum()), rng, sign_fix)
    else:
        raise RuntimeError("QR sampler could not produce an orthogonal draw")
    return HaarSample(q[0] if size is None else q, QR)


def assemble_gamma(gamma11, u1, u2, delta):
    """Assemble ``[[g11, s u2'], [s u1, h1 diag(-g11, delta) h2']]``.

    Vectorized over a leading batch axis in every argument.
    """
    g11 = np.asarray(gamma11, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if np.any(np.abs(g11) >= 1.0):
        raise ValueError("gamma11 must lie strictly inside (-1, 1)")
    if u1.shape != u2.shape:
        raise ValueError(f"u1 and u2 shapes differ: {u1.shape} vs {u2.shape}")
    d = u1.shape[-1]
    if d < 2:
        raise ValueError("u1, u2 must have dimension p - 1 >= 2")
    if delta.shape[-2:] != (d - 1, d - 1):
        raise ValueError(f"delta must be ({d - 1}, {d - 1}) for p = {d + 1}, got {delta.shape[-2:]}")
    for name, u in (("u1", u1), ("u2", u2)):
        if np.any(np.abs(np.linalg.norm(u, axis=-1) - 1.0) > UNIT_TOL):
            raise ValueError(f"{name} must be a unit vector")
    if np.any(orthogonality_defect(delta) > ORTHO_TOL):
        raise ValueError("delta must be orthogonal")

    batch = g11.shape
    p = d + 1
    s = np.sqrt(1.0 - g11 * g11)
    a22 = np.zeros(batch + (d, d))
    a22[..., 0, 0] = -g11
    a22[..., 1:, 1:] = delta
    h1 = complete_orthogonal(u1)
    h2 = complete_orthogonal(u2)
    out = np.empty(batch + (p, p))
    out[..., 0, 0] = g11
    out[..., 0, 1:] = s[..., None] * u2
    out[..., 1:, 0] = s[..., None] * u1
    out[..., 1:, 1:] = h1 @ a22 @ np.swapaxes(h2, -1, -2)
    return out


def sample_haar_decomposition(p, rng, size=None, recursive=False):
    """Haar matrix on O(p), p >= 3, built from its first row and column.

    1. draw g11 from f(.|p);
    2. draw u1, u2 iid uniform on the unit sphere of R^{p-1};
    3. complete each u_i to an orthogonal matrix h_i with first column u_i;
    4. draw delta Haar on O(p-2)

    and assemble with :func:`assemble_gamma`.  ``delta`` comes from the QR
    sampler unless ``recursive`` is set, in which case this sampler is
    reused down to dimension 3 or below.
    """
    p = _check_p(p, 3)
    n = 1 if size is None else int(size)
    g11 = sample_f(p, rng, size=n)
    # |g11| = 1 has probability zero; redraw rather than divide by zero later
    for _ in range(_MAX_REDRAWS):
        edge = np.abs(g11) >= 1.0
        if not np.any(edge):
            break
        g11[edge] = sample_f(p, rng, size=int(edge.sum()))
    u1 = sample_uniform_sphere(p - 1, rng, size=n)
    u2 = sample_uniform_sphere(p - 1, rng, size=n)
    if recursive and p - 2 >= 3:
        delta = sample_haar_decomposition(p - 2, rng, size=n, recursive=True).gamma
    else:
        delta = sample_haar_qr(p - 2, rng, size=n).gamma
    gamma = assemble_gamma(g11, u1, u2, delta)
    worst = float(np.max(orthogonality_defect(gamma)))
    if worst > ORTHO_TOL:
        raise RuntimeError(f"decomposition sampler produced a non-orthogonal matrix (defect {worst:.3e})")
    return HaarSample(gamma[0] if size is None else gamma, DECOMPOSITION)


def decompose_gamma(g):
    """Split an orthogonal matrix (or a stack) into a :class:`GammaPartition`.

    Raises
    ------
    OutsideOpPlusError
        If ``1 - g11^2 < 1e-14`` for any matrix.
    ValueError
        If the input is not orthogonal within 1e-10.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim < 2 or g.shape[-1] != g.shape[-2] or g.shape[-1] < 2:
        raise ValueError(f"expected a square matrix of size >= 2, got shape {g.shape}")
    if np.any(orthogonality_defect(g) > ORTHO_TOL):
        raise ValueError("decompose_gamma needs an orthogonal matrix (defect <= 1e-10)")
    g11 = g[..., 0, 0]
    rest = 1.0 - g11 * g11
    if np.any(rest < _OP_PLUS_MARGIN):
        raise OutsideOpPlusError("outside O_p-plus: |g11| is numerically 1, W1 and W2 are undefined")
    s = np.sqrt(rest)[..., None]
    gamma21 = g[..., 1:, 0].copy()
    gamma12_t = g[..., 0, 1:].copy()
    return GammaPartition(
        gamma11=g11.copy() if g11.ndim else float(g11),
        gamma21=gamma21,
        gamma12_t=gamma12_t,
        gamma22=g[..., 1:, 1:].copy(),
        w1=gamma21 / s,
        w2=gamma12_t / s,
    )


def haar_batches(p, n, rng, method=QR, sampler=None, recursive=False):
    """Yield stacks of Haar matrices totalling ``n``, in memory-bounded batches.

    ``sampler`` overrides the method with any callable ``(p, rng, size) ->
    HaarSample``-or-array; the verification battery injects broken samplers
    through it.
    """
    if sampler is None:
        if method == QR:
            sampler = sample_haar_qr
        elif method == DECOMPOSITION:
            def sampler(p, rng, size):
                return sample_haar_decomposition(p, rng, size=size, recursive=recursive)
        else:
            raise ValueError(f"unknown Haar method {method!r}")
    rows = max(1, _BATCH_ELEMENTS // (p * p))
    done = 0
    while done < n:
        m = min(rows, n - done)
        out = sampler(p, rng, size=m)
        yield out.gamma if isinstance(out, HaarSample) else np.asarray(out)
        done += m
