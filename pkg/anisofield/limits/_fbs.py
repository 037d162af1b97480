"""Fractional Brownian sheet covariance and exact sampling."""

import logging

import numpy as np
from scipy import linalg

from anisofield import errors


logger = logging.getLogger(__name__)

MAX_POINTS = 64
_CLIP = 1e-12
_NEGATIVE = 1e-10


def _factor(x, y, H):
    return np.abs(x) ** (2.0 * H) + np.abs(y) ** (2.0 * H) - np.abs(x - y) ** (2.0 * H)


def fbs_covariance(x, y, H1, H2):
    """``E B(x) B(y)`` of the sheet with Hurst indices ``(H1, H2)``."""

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    value = 0.25 * _factor(x[..., 0], y[..., 0], H1) * _factor(x[..., 1], y[..., 1], H2)
    return float(value) if np.ndim(value) == 0 else value


def fbs_covariance_matrix(points, H1, H2):
    points = np.asarray(points, dtype=float)
    return fbs_covariance(points[:, None, :], points[None, :, :], H1, H2)


def _eigen_factor(covariance):
    eigenvalues, eigenvectors = linalg.eigh(covariance)
    largest = float(eigenvalues.max(initial=0.0))
    if eigenvalues.min(initial=0.0) < -_NEGATIVE * max(largest, 1.0):
        raise errors.NotPSD(
            "sheet covariance has eigenvalue '%s' (largest '%s')" % (eigenvalues.min(), largest),
            smallest=float(eigenvalues.min()),
            largest=largest,
        )
    clipped = np.where(eigenvalues > _CLIP * largest, eigenvalues, 0.0)
    n_clipped = int(np.sum(clipped != eigenvalues))
    if n_clipped:
        logger.debug("clipped %d eigenvalues of the sheet covariance", n_clipped)
    return eigenvectors * np.sqrt(clipped)


def fbs_sample(points, H1, H2, seed, replicates=1):
    """Exact Gaussian samples at ``points``, shape ``(replicates, len(points))``.

    The covariance is factored by Cholesky. A singular covariance (a Hurst
    index of 1, or repeated points) falls back to a symmetric
    eigendecomposition with eigenvalues below ``1e-12`` of the largest set
    to zero, which samples degenerate sheets exactly.
    """

    points = np.asarray(points, dtype=float)
    if len(points) > MAX_POINTS:
        raise errors.ConfigError(
            "sheet sampling supports at most %d points, got %d" % (MAX_POINTS, len(points))
        )
    if not (0.0 < H1 <= 1.0 and 0.0 < H2 <= 1.0):
        raise errors.ConfigError("Hurst indices must lie in (0, 1], got '%s'" % ((H1, H2),))

    covariance = fbs_covariance_matrix(points, H1, H2)
    try:
        factor = linalg.cholesky(covariance, lower=True)
    except linalg.LinAlgError:
        logger.debug("sheet covariance is singular, factoring by eigendecomposition")
        factor = _eigen_factor(covariance)

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    normals = rng.standard_normal((replicates, len(points)))
    return normals @ factor.T
