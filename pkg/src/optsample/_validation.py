"""Input validation helpers shared by the functional and estimator APIs."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

SIMPLEX_ATOL = 1e-12


def check_functional_matrix(X, *, allow_duplicates=False):
    """Validate a stack of functionals (one per row) and return it as floats."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1)
    if X.shape[1] < 1:
        raise ValueError("functionals must have at least one coordinate")
    zero_rows = np.flatnonzero(~X.any(axis=1))
    if zero_rows.size:
        raise ValueError(f"functional {zero_rows[0]} is the all-zeros vector")
    if not allow_duplicates:
        _, first, counts = np.unique(X, axis=0, return_index=True, return_counts=True)
        if np.any(counts > 1):
            dup = int(first[np.argmax(counts > 1)])
            raise ValueError(f"functional {dup} appears more than once")
    return X


def check_costs(costs, size):
    if costs is None:
        return np.ones(size)
    costs = np.asarray(costs, dtype=np.float64).reshape(-1)
    if costs.shape != (size,):
        raise ValueError(f"expected {size} costs, got {costs.shape[0]}")
    if not np.all(np.isfinite(costs)) or np.any(costs < 0):
        raise ValueError("costs must be finite and nonnegative")
    return costs


def check_variances(sigma_sq, n):
    if sigma_sq is None:
        return np.ones(n)
    sigma_sq = np.asarray(sigma_sq, dtype=np.float64).reshape(-1)
    if sigma_sq.shape != (n,):
        raise ValueError(f"variance profile has length {sigma_sq.shape[0]}, expected {n}")
    if not np.all(np.isfinite(sigma_sq)) or np.any(sigma_sq <= 0):
        raise ValueError("variances must be strictly positive")
    return sigma_sq


def check_distribution(weights, size, *, atol=SIMPLEX_ATOL):
    """Return ``weights`` as a float vector on the probability simplex of ``size`` atoms."""
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.shape != (size,):
        raise ValueError(f"distribution has {w.shape[0]} weights, expected {size}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("distribution weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > atol:
        raise ValueError(f"distribution weights sum to {w.sum():.15g}, not 1")
    return w


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def normalize_rows(mat):
    """Clip negatives and rescale each nonzero row to sum to one."""
    mat = np.clip(mat, 0.0, None)
    sums = mat.sum(axis=1, keepdims=True)
    np.divide(mat, sums, out=mat, where=sums > 0)
    return mat
