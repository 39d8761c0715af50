"""Regularized canonical correlation analysis between two data matrices.

The solve whitens both covariances with symmetric inverse square roots and
takes an SVD of the whitened cross-covariance.  Ridge regularization keeps
the whitening finite when a node has fewer rows than features, which is the
normal situation when training on a handful of samples per class.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError

# Eigenvalues below this are treated as exact rank deficiency.
EIGENVALUE_CLAMP = 1e-12
# Singular values above this count toward the retained rank.
RANK_TOL = 1e-9


@dataclass(frozen=True)
class CcaResult:
    """Paired projections and canonical correlations from one solve.

    projections_x : (d, rank) array, columns are X-side directions
    projections_y : (k, rank) array, columns are Y-side directions
    correlations  : (rank,) array, non-increasing, each in [0, 1]
    """

    projections_x: np.ndarray
    projections_y: np.ndarray
    correlations: np.ndarray

    @property
    def rank(self):
        return self.correlations.shape[0]


def center_columns(m):
    """Subtract each column's mean; returns (centered, means)."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        raise ValueError("cannot center an empty matrix")
    means = m.mean(axis=0)
    return m - means, means


def one_hot(labels, k):
    """Indicator matrix (n, k): row i has a single 1 at column labels[i]."""
    labels = np.asarray(labels, dtype=int)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"label out of range for k={k}: {labels.min()}..{labels.max()}")
    out = np.zeros((labels.shape[0], k), dtype=float)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _inverse_sqrt(sym):
    """Symmetric inverse square root via eigendecomposition with clamping."""
    w, v = np.linalg.eigh(sym)
    w = np.maximum(w, EIGENVALUE_CLAMP)
    return (v / np.sqrt(w)) @ v.T


def _fix_signs(mat):
    """Flip each column so its largest-magnitude entry is positive.

    Makes the decomposition output reproducible across LAPACK backends.
    """
    idx = np.argmax(np.abs(mat), axis=0)
    signs = np.sign(mat[idx, np.arange(mat.shape[1])])
    signs[signs == 0] = 1.0
    return mat * signs


def canonical_correlation(x, y, gamma=0.0):
    """CCA between x (n, d) and y (n, k) with ridge parameter gamma.

    Covariances use the n-1 divisor.  Both covariance blocks get gamma added
    to the diagonal before whitening.  Retains every direction whose singular
    value exceeds RANK_TOL, but always at least the leading one.

    Raises DegenerateInputError when n < 2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("x and y must be 2-D")
    n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError(f"row mismatch: x has {n}, y has {y.shape[0]}")
    if n < 2:
        raise DegenerateInputError(f"need at least 2 rows, got {n}")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")

    xc, _ = center_columns(x)
    yc, _ = center_columns(y)
    denom = n - 1
    sxx = (xc.T @ xc) / denom
    syy = (yc.T @ yc) / denom
    sxy = (xc.T @ yc) / denom

    d = x.shape[1]
    k = y.shape[1]
    sxx_isqrt = _inverse_sqrt(sxx + gamma * np.eye(d))
    syy_isqrt = _inverse_sqrt(syy + gamma * np.eye(k))

    u, s, vt = np.linalg.svd(sxx_isqrt @ sxy @ syy_isqrt)
    s = np.clip(s, 0.0, 1.0)

    rank = max(1, int(np.sum(s > RANK_TOL)))
    rank = min(rank, min(d, k, n - 1))
    rank = max(rank, 1)

    proj_x = _fix_signs(sxx_isqrt @ u[:, :rank])
    proj_y = _fix_signs(syy_isqrt @ vt.T[:, :rank])
    return CcaResult(proj_x, proj_y, s[:rank].copy())


def default_gamma(x):
    """Ridge scaled to the data: 1e-6 times the mean feature variance.

    Guarantees invertibility when rows are scarce without visibly perturbing
    well-conditioned solves.
    """
    xc, _ = center_columns(np.asarray(x, dtype=float))
    n = xc.shape[0]
    var = np.mean(np.sum(xc * xc, axis=0)) / max(n - 1, 1)
    return 1e-6 * max(var, 1e-6)
