"""Closed-form A-optimal designs for K-choose-N binary functional sets.

``B_k`` is the set of binary n-vectors with exactly ``k`` ones. Sampling it
uniformly is A-optimal with ``tr(M^-1) = n/k + (n-1)^2 n / (n-k)``, and the same
design stays optimal when ``B_k`` is enlarged by any ``B_i`` with ``i > k``.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from ._validation import check_positive_int
from .exceptions import EnumerationCapError, UnidentifiableError
from .model import FunctionalSet

ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class ClosedFormSolution:
    n: int
    k: int
    optimal_value: float
    support_description: str


def _check_nk(n, k):
    n = check_positive_int(n, "n")
    k = check_positive_int(k, "k")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    return n, k


def enumerate_bk(n, k, cap=ENUMERATION_CAP):
    """All ``C(n, k)`` binary vectors with ``k`` ones, ordered by their one-positions."""
    n, k = _check_nk(n, k)
    if comb(n, k) > cap:
        raise EnumerationCapError(f"C({n},{k}) = {comb(n, k)} exceeds the cap {cap}")
    rows = np.zeros((comb(n, k), n))
    for r, ones in enumerate(combinations(range(n), k)):
        rows[r, list(ones)] = 1.0
    return FunctionalSet(rows)


def binary_lower_bound(n, k):
    """Lower bound on ``tr(M^-1)`` for any set whose functionals all have at least ``k`` ones."""
    n, k = _check_nk(n, k)
    if k == n:
        raise ValueError("the bound needs k < n")
    return n / k + (n - 1) ** 2 * n / (n - k)


def bk_optimal(n, k):
    n, k = _check_nk(n, k)
    if k == n:
        if n == 1:
            return ClosedFormSolution(1, 1, 1.0, "uniform over B_1")
        raise UnidentifiableError(f"B_{n} with n={n} contains only the all-ones vector and is unidentifiable")
    return ClosedFormSolution(n, k, binary_lower_bound(n, k), f"uniform over B_{k}")


def bk_union_optimal(n, k_min):
    """Optimum over the union of ``B_i`` for ``i >= k_min``; all mass sits on ``B_{k_min}``."""
    n, k_min = _check_nk(n, k_min)
    if k_min == n and n > 1:
        raise UnidentifiableError("the union reduces to B_n, which is unidentifiable")
    return bk_optimal(n, k_min)


def enumerate_bk_union(n, k_min, cap=ENUMERATION_CAP):
    n, k_min = _check_nk(n, k_min)
    total = sum(comb(n, i) for i in range(k_min, n + 1))
    if total > cap:
        raise EnumerationCapError(f"union of B_{k_min}..B_{n} has {total} functionals, cap is {cap}")
    return FunctionalSet(np.vstack([enumerate_bk(n, i).matrix for i in range(k_min, n + 1)]))
