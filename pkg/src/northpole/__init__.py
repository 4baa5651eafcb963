"""Haar random orthogonal matrices and the laws of their north-pole functionals."""

from .densities import beta_density_g0, cdf_f, density_f, normal_cdf, regularized_incomplete_beta, sample_f
from .haar import assemble_gamma, decompose_gamma, sample_haar_decomposition, sample_haar_qr
from .pole import sample_u1, sample_u2, sample_u3, u2_identity, u2_kernel, u3_identity, u3_kernel, u_k_direct
from .rng import DEFAULT_SEED, RngStream

__version__ = "0.1.0"
