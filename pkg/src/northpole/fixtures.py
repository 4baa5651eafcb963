"""Deliberately broken components for checking that the battery has teeth."""

from __future__ import annotations

import numpy as np

from .haar import sample_haar_qr


def qr_without_sign_fix(p, rng, size=None):
    """Gaussian QR without the diag(R) sign correction (not Haar)."""
    return sample_haar_qr(p, rng, size=size, sign_fix=False)


def u2_kernel_without_xi1_squared(xi1, xi2):
    """U_2 kernel with the leading xi1^2 term dropped."""
    return (1.0 - np.square(xi1)) * xi2


MUTANTS = {
    "qr-no-sign-fix": {"haar_qr": qr_without_sign_fix},
    "u2-drop-xi1-squared": {"u2_kernel": u2_kernel_without_xi1_squared},
}
