"""scikit-learn style front ends.

``ExactDesign`` and ``ProductDesign`` fit sampling distributions; ``MVUEstimator``
fits the mean vector from observed functionals. All expose ``get_params`` /
``set_params`` through :class:`sklearn.base.BaseEstimator`.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._validation import check_variances
from .dag_dp import AccessGraph, SourceDrainDag, enumerate_paths, target_matrix
from .exact_solver import SolverOptions, solve_budgeted, solve_simplex
from .harness.experiment import round_to_counts
from .model import FunctionalSet, InfoMatrix, Objective, build_info_matrix
from .product_optimizer import OptimizeOptions, optimize_products


class ExactDesign(BaseEstimator):
    """Optimal sampling distribution over the rows of ``X``.

    Parameters
    ----------
    objective : {"a-trace", "a-pseudo-trace", "e-min-eig"}
    budget : float, optional
        Bound on the expected cost ``sum_x c(x) p(x)``; costs are passed to ``fit``.
    variances : array-like of shape (n_features,), optional
        Known per-coordinate variances; all ones by default.
    tol : float
        Relative duality-gap threshold.
    max_iter : int
    line_search : bool

    Attributes
    ----------
    weights_ : ndarray of shape (n_functionals,)
    value_ : float
    certificate_gap_ : float
    n_iter_ : int
    converged_ : bool
    info_matrix_ : ndarray of shape (n_features, n_features)
    """

    def __init__(self, objective="a-trace", budget=None, variances=None, tol=1e-6, max_iter=100_000, line_search=True):
        self.objective = objective
        self.budget = budget
        self.variances = variances
        self.tol = tol
        self.max_iter = max_iter
        self.line_search = line_search

    def fit(self, X, y=None, costs=None):
        fset = X if isinstance(X, FunctionalSet) else FunctionalSet(X, costs)
        obj = Objective.coerce(self.objective)
        opts = SolverOptions(tolerance=self.tol, max_iterations=self.max_iter, line_search=self.line_search)
        if self.budget is None:
            res = solve_simplex(fset, self.variances, obj, opts)
        else:
            res = solve_budgeted(fset, self.variances, obj, self.budget, opts)
        self.functionals_ = fset.matrix
        self.n_features_in_ = fset.dimension
        self.weights_ = res.distribution
        self.value_ = res.value
        self.certificate_gap_ = res.certificate_gap
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        self.info_matrix_ = build_info_matrix(fset, res.distribution, self.variances).entries
        return self

    def sample(self, n_samples, random_state=None):
        """Indices of ``n_samples`` functionals drawn i.i.d. from the fitted weights."""
        check_is_fitted(self, "weights_")
        rng = np.random.default_rng(random_state)
        return rng.choice(self.weights_.size, size=n_samples, p=self.weights_)

    def plan(self, total):
        """Deterministic sampling plan: how many times to use each functional."""
        check_is_fitted(self, "weights_")
        return round_to_counts(self.weights_, total)


class ProductDesign(BaseEstimator):
    """Product-rule sampling distribution over the paths of a graph.

    ``fit`` takes a :class:`~optsample.dag_dp.SourceDrainDag` or an
    :class:`~optsample.dag_dp.AccessGraph` in place of a data matrix.
    """

    def __init__(
        self,
        objective="a-trace",
        sweep_order="topological",
        max_sweeps=200,
        sweep_tol=1e-8,
        restarts=3,
        inner_tol=1e-9,
        random_state=0,
    ):
        self.objective = objective
        self.sweep_order = sweep_order
        self.max_sweeps = max_sweeps
        self.sweep_tol = sweep_tol
        self.restarts = restarts
        self.inner_tol = inner_tol
        self.random_state = random_state

    def fit(self, graph, y=None):
        if not isinstance(graph, (SourceDrainDag, AccessGraph)):
            raise TypeError("ProductDesign.fit expects a SourceDrainDag or AccessGraph")
        opts = OptimizeOptions(
            sweep_order=self.sweep_order,
            max_sweeps=self.max_sweeps,
            sweep_tolerance=self.sweep_tol,
            restarts=self.restarts,
            seed=self.random_state,
            inner=SolverOptions(tolerance=self.inner_tol, max_iterations=2000),
        )
        res = optimize_products(graph, self.objective, opts)
        self.graph_ = graph
        self.alpha_ = res.alpha
        self.value_ = res.value
        self.sweep_trace_ = res.sweep_trace
        self.restart_values_ = res.restart_values
        self.info_matrix_ = target_matrix(graph, res.alpha, "M")
        return self

    def path_distribution(self, cap=10**5):
        """Enumerated paths with their probabilities under the fitted product rule."""
        check_is_fitted(self, "alpha_")
        return enumerate_paths(self.graph_, self.alpha_, cap=cap)


class MVUEstimator(RegressorMixin, BaseEstimator):
    """Minimum-variance unbiased estimate of ``mu`` from ``y_t = w_t @ x_t``.

    Weighted least squares with weights ``1 / (x_t @ diag(variances) @ x_t)``;
    ``covariance_`` is the inverse summed information, the estimator's MSE matrix.
    """

    def __init__(self, variances=None):
        self.variances = variances

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        sigma_sq = check_variances(self.variances, X.shape[1])
        w = 1.0 / ((X**2) @ sigma_sq)
        info = InfoMatrix((X * w[:, None]).T @ X, validate=False)
        lam, vec = info.eigenvalues, info.eigenvectors
        if lam[0] <= 1e-12 * lam[-1]:
            raise ValueError("observed functionals do not span every coordinate")
        self.covariance_ = (vec / lam) @ vec.T
        self.mean_ = self.covariance_ @ (X.T @ (w * y))
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        return X @ self.mean_
