"""Functionals, sampling distributions, information matrices and design criteria.

A functional ``x`` observes ``y = w @ x`` with ``w ~ N(mu, diag(sigma_sq))``, so a
single draw has variance ``x @ diag(sigma_sq) @ x``. A sampling distribution ``p``
over a finite set of functionals yields the per-sample information matrix

    M(p) = sum_x p(x) / (x @ diag(sigma_sq) @ x) * outer(x, x),

whose inverse is the MSE matrix of the minimum-variance unbiased estimator.
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from ._validation import (
    check_costs,
    check_distribution,
    check_functional_matrix,
    check_positive_int,
    check_variances,
)
from .exceptions import UnidentifiableError

RANK_RTOL = 1e-10
PSD_RTOL = 1e-9
SYMMETRY_ATOL = 1e-12


@dataclass(frozen=True)
class Functional:
    coeffs: tuple
    cost: float = 1.0

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs or not any(coeffs):
            raise ValueError("a functional needs at least one nonzero coefficient")
        if self.cost < 0:
            raise ValueError("cost must be nonnegative")
        object.__setattr__(self, "coeffs", coeffs)


class FunctionalSet:
    """An ordered, duplicate-free set of functionals of common dimension.

    Rows of :attr:`matrix` are the functionals; :attr:`costs` holds ``c(x)``.
    """

    def __init__(self, matrix, costs=None):
        matrix = check_functional_matrix(matrix)
        matrix.setflags(write=False)
        costs = check_costs(costs, matrix.shape[0])
        costs.setflags(write=False)
        self._matrix = matrix
        self._costs = costs

    @classmethod
    def from_functionals(cls, functionals):
        functionals = list(functionals)
        if not functionals:
            raise ValueError("functional set must be nonempty")
        dims = {len(f.coeffs) for f in functionals}
        if len(dims) != 1:
            raise ValueError(f"functionals have mixed dimensions {sorted(dims)}")
        return cls([f.coeffs for f in functionals], [f.cost for f in functionals])

    @property
    def matrix(self):
        return self._matrix

    @property
    def costs(self):
        return self._costs

    @property
    def dimension(self):
        return self._matrix.shape[1]

    def __len__(self):
        return self._matrix.shape[0]

    def __iter__(self):
        for row, cost in zip(self._matrix, self._costs):
            yield Functional(tuple(row), float(cost))

    def __repr__(self):
        return f"FunctionalSet(size={len(self)}, dimension={self.dimension})"

    def functional_variances(self, variances=None):
        """``x @ diag(sigma_sq) @ x`` for every functional."""
        sigma_sq = check_variances(variances, self.dimension)
        return (self._matrix**2) @ sigma_sq

    def uniform(self):
        return np.full(len(self), 1.0 / len(self))


class InfoMatrix:
    """Symmetric PSD matrix with a lazily computed, ascending spectrum."""

    def __init__(self, entries, *, validate=True):
        entries = np.array(entries, dtype=np.float64, copy=True)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"information matrix must be square, got shape {entries.shape}")
        if validate:
            asym = np.max(np.abs(entries - entries.T), initial=0.0)
            if asym > SYMMETRY_ATOL * max(1.0, np.max(np.abs(entries), initial=0.0)):
                raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
        entries = 0.5 * (entries + entries.T)
        entries.setflags(write=False)
        self._entries = entries
        if validate:
            lam = self.eigenvalues
            if lam.size and lam[0] < -PSD_RTOL * max(lam[-1], 0.0) - 1e-300:
                raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {lam[0]:.3g})")

    @property
    def entries(self):
        return self._entries

    @property
    def shape(self):
        return self._entries.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._entries, dtype=dtype)

    def __repr__(self):
        return f"InfoMatrix({self._entries!r})"

    @cached_property
    def _eigh(self):
        lam, vec = np.linalg.eigh(self._entries)
        lam.setflags(write=False)
        vec.setflags(write=False)
        return lam, vec

    @property
    def eigenvalues(self):
        return self._eigh[0]

    @property
    def eigenvectors(self):
        return self._eigh[1]

    def rank(self, rtol=PSD_RTOL):
        lam = self.eigenvalues
        return int(np.count_nonzero(lam > rtol * max(lam[-1], 0.0))) if lam[-1] > 0 else 0

    def range_basis(self, rtol=PSD_RTOL):
        """Orthonormal basis (columns) of the eigenvectors with non-negligible eigenvalues."""
        lam, vec = self._eigh
        if lam[-1] <= 0:
            return vec[:, :0]
        return vec[:, lam > rtol * lam[-1]]


class ObjectiveKind(str, Enum):
    A_TRACE = "a-trace"
    A_PSEUDO_TRACE = "a-pseudo-trace"
    E_MIN_EIG = "e-min-eig"


@dataclass(frozen=True)
class Objective:
    """Design criterion. A-criteria are minimized, the E-criterion is maximized.

    The A-criteria act on the normalized information matrix ``M``; the E-criterion
    acts on the second-moment matrix ``F = sum_x p(x) outer(x, x)``.
    """

    kind: ObjectiveKind = ObjectiveKind.A_TRACE
    rank_tolerance: float = PSD_RTOL

    def __post_init__(self):
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))
        if not 0.0 < self.rank_tolerance < 1.0:
            raise ValueError("rank_tolerance must lie in (0, 1)")

    @classmethod
    def coerce(cls, obj):
        if isinstance(obj, Objective):
            return obj
        return cls(ObjectiveKind(obj))

    @property
    def maximize(self):
        return self.kind is ObjectiveKind.E_MIN_EIG

    @property
    def uses_f_matrix(self):
        return self.kind is ObjectiveKind.E_MIN_EIG

    def better(self, a, b):
        """True when value ``a`` is strictly better than ``b``."""
        return a > b if self.maximize else a < b


@dataclass(frozen=True)
class GenerativeModel:
    mu: np.ndarray
    variances: np.ndarray = field(default=None)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "variances", check_variances(self.variances, mu.size))


@dataclass(frozen=True)
class IdentifiabilityReport:
    rank: int
    null_basis: np.ndarray  # shape (N - rank, N), orthonormal rows

    @property
    def identifiable(self):
        return self.null_basis.shape[0] == 0


@dataclass(frozen=True)
class SimulationResult:
    empirical_mse_trace: float
    predicted: float
    retries: int = 0


def build_info_matrix(fset, dist, variances=None):
    """Normalized information matrix ``M(p)`` of a distribution over ``fset``."""
    p = check_distribution(dist, len(fset))
    scale = p / fset.functional_variances(variances)
    X = fset.matrix
    return InfoMatrix((X * scale[:, None]).T @ X)


def build_f_matrix(fset, dist):
    """Second-moment matrix ``F(p) = sum_x p(x) outer(x, x)``."""
    p = check_distribution(dist, len(fset))
    X = fset.matrix
    return InfoMatrix((X * p[:, None]).T @ X)


def design_matrix(fset, dist, variances, obj):
    """The matrix a criterion is evaluated on: ``F`` for E, ``M`` otherwise."""
    if Objective.coerce(obj).uses_f_matrix:
        return build_f_matrix(fset, dist)
    return build_info_matrix(fset, dist, variances)


def _compress(entries, basis):
    if basis is None:
        return np.asarray(entries)
    return basis.T @ np.asarray(entries) @ basis


def objective_value(m, obj, basis=None):
    """Raw criterion value of an information (or F) matrix.

    ``basis`` restricts the matrix to a subspace (columns orthonormal) before the
    spectrum is taken; solvers use it to work on the identifiable subspace.
    """
    obj = Objective.coerce(obj)
    entries = m.entries if isinstance(m, InfoMatrix) else np.asarray(m, dtype=np.float64)
    lam = np.linalg.eigvalsh(_compress(entries, basis))
    if obj.kind is ObjectiveKind.E_MIN_EIG:
        return float(lam[0])
    top = lam[-1]
    if top <= 0:
        raise UnidentifiableError("information matrix is zero")
    cutoff = obj.rank_tolerance * top
    if obj.kind is ObjectiveKind.A_TRACE:
        if lam[0] <= cutoff:
            raise UnidentifiableError(
                "information matrix is singular: the design is unidentifiable, use a-pseudo-trace"
            )
        return float(np.sum(1.0 / lam))
    return float(np.sum(1.0 / lam[lam > cutoff]))


def objective_gradient(fset, dist, variances, obj):
    """(Super/sub)gradient of the criterion with respect to the weights ``p(x)``."""
    obj = Objective.coerce(obj)
    p = check_distribution(dist, len(fset))
    X = fset.matrix
    if obj.kind is ObjectiveKind.E_MIN_EIG:
        F = build_f_matrix(fset, p)
        u = F.eigenvectors[:, 0]
        return (X @ u) ** 2
    m = build_info_matrix(fset, p, variances)
    lam, vec = m.eigenvalues, m.eigenvectors
    cutoff = obj.rank_tolerance * lam[-1]
    keep = lam > cutoff
    if obj.kind is ObjectiveKind.A_TRACE and not np.all(keep):
        raise UnidentifiableError(
            "information matrix is singular: the design is unidentifiable, use a-pseudo-trace"
        )
    # rows of X projected on eigenvectors, scaled by lambda^-1 -> x @ M^-2 @ x = ||.||^2
    proj = (X @ vec[:, keep]) / lam[keep]
    return -np.sum(proj**2, axis=1) / fset.functional_variances(variances)


def check_identifiability(fset, rtol=RANK_RTOL):
    """Rank of the functional matrix and an orthonormal basis of its null space."""
    X = fset.matrix if isinstance(fset, FunctionalSet) else np.asarray(fset, dtype=np.float64)
    _, s, vt = np.linalg.svd(X, full_matrices=True)
    rank = int(np.count_nonzero(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return IdentifiabilityReport(rank=rank, null_basis=vt[rank:].copy())


def simulate_estimation(fset, dist, gm, samples, trials, seed, max_retries=1000):
    """Monte-Carlo MSE trace of the MVUE under i.i.d. draws from ``dist``.

    Each trial draws ``samples`` functionals, then one ``w_t`` per draw, and fits
    the weighted least-squares estimate. ``predicted`` averages ``tr(M_bar^-1)``
    over the realized designs, where ``M_bar`` is the summed information.
    """
    from .estimators import MVUEstimator

    samples = check_positive_int(samples, "samples")
    trials = check_positive_int(trials, "trials")
    p = check_distribution(dist, len(fset))
    if gm.mu.size != fset.dimension:
        raise ValueError("generative model dimension does not match the functional set")
    n = fset.dimension
    rng = np.random.default_rng(seed)
    X = fset.matrix
    sd = np.sqrt(gm.variances)
    estimator = MVUEstimator(variances=gm.variances)

    sq_err = np.empty(trials)
    predicted = np.empty(trials)
    retries = 0
    for t in range(trials):
        for _ in range(max_retries + 1):
            idx = rng.choice(len(fset), size=samples, p=p)
            rows = X[idx]
            if np.linalg.matrix_rank(rows) == n:
                break
            retries += 1
        else:
            raise UnidentifiableError("insufficient support for identifiability")
        w = gm.mu + sd * rng.standard_normal((samples, n))
        y = np.einsum("ij,ij->i", w, rows)
        estimator.fit(rows, y)
        sq_err[t] = np.sum((estimator.mean_ - gm.mu) ** 2)
        predicted[t] = np.trace(estimator.covariance_)
    return SimulationResult(float(sq_err.mean()), float(predicted.mean()), retries)
