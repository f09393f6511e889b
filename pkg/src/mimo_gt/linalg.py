"""Minimal complex linear algebra for the zero-forcing transmitter.

Matrices and vectors are plain complex ``numpy`` arrays.  Only the two
primitives the beamformer and channel need live here: circularly-symmetric
Gaussian sampling and orthonormal nullspace bases.
"""

import math

import numpy as np

DEFAULT_RANK_TOL = 1e-10


def sample_cgrv(rng: np.random.Generator, variance: float, size=None):
    """Draw circularly-symmetric complex Gaussians with E[|z|^2] = variance.

    Real and imaginary parts are independent zero-mean Gaussians with
    variance ``variance / 2`` each.
    """
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance!r}")
    scale = math.sqrt(variance / 2.0)
    re = rng.normal(0.0, scale, size)
    im = rng.normal(0.0, scale, size)
    return re + 1j * im


def nullspace_orthonormal_basis(a: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the (right) nullspace of ``a``, as matrix columns.

    Numerical rank is decided by singular values above ``rank_tol`` times the
    largest one.  A matrix with zero rows constrains nothing, so its nullspace
    is the full ambient space and the identity basis is returned.
    """
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    rows, cols = a.shape
    if cols < 1:
        raise ValueError("matrix must have at least one column")
    if not rank_tol > 0:
        raise ValueError(f"rank_tol must be positive, got {rank_tol!r}")
    if rows == 0:
        return np.eye(cols, dtype=complex)
    a = a.astype(complex, copy=False)
    if not np.isfinite(a).all():
        raise ValueError("matrix contains non-finite entries")
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.count_nonzero(s > rank_tol * s[0])) if s[0] > 0 else 0
    return vh[rank:].conj().T
