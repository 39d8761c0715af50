"""Independent oracles, kept deliberately separate from the library code.

These re-derive expected values by brute force or textbook formulations so
the tests never check the implementation against itself.
"""

import numpy as np
import scipy.linalg


def cca_correlations_oracle(x, y, gamma):
    """Canonical correlations via the generalized eigenproblem
    Sxy Syy^-1 Syx a = rho^2 Sxx a (both blocks ridge-regularized).
    Returns all correlations, non-increasing.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    x = x - x.mean(axis=0)
    y = y - y.mean(axis=0)
    n = x.shape[0]
    sxx = x.T @ x / (n - 1) + gamma * np.eye(x.shape[1])
    syy = y.T @ y / (n - 1) + gamma * np.eye(y.shape[1])
    sxy = x.T @ y / (n - 1)
    m = sxy @ np.linalg.inv(syy) @ sxy.T
    w = scipy.linalg.eigh(m, sxx, eigvals_only=True)
    return np.sqrt(np.clip(w, 0.0, 1.0))[::-1]


def gini_oracle(labels, n_classes):
    counts = np.bincount(labels, minlength=n_classes)
    p = counts / counts.sum()
    return 1.0 - np.sum(p * p)


def best_split_1d_oracle(values, labels, n_classes):
    """Enumerate every midpoint between consecutive distinct sorted values;
    returns (threshold, gain) maximizing the gini decrease, lowest threshold
    on ties.
    """
    values = np.asarray(values, float)
    labels = np.asarray(labels, int)
    n = len(values)
    parent = gini_oracle(labels, n_classes)
    distinct = np.unique(values)
    best_thr, best_gain = 0.0, 0.0
    for lo, hi in zip(distinct[:-1], distinct[1:]):
        thr = (lo + hi) / 2.0
        left = labels[values <= thr]
        right = labels[values > thr]
        gain = parent - (len(left) / n) * gini_oracle(left, n_classes) \
            - (len(right) / n) * gini_oracle(right, n_classes)
        if gain > best_gain:
            best_thr, best_gain = thr, gain
    return best_thr, best_gain


def nearest_prototype_oracle(features, prototypes):
    """Class of the closest prototype mean in Euclidean distance."""
    dists = [np.linalg.norm(features - p.mean_spectrum) for p in prototypes]
    return int(prototypes[int(np.argmin(dists))].material)
