"""Certified solvers for the optimal sampling distribution over an explicit set.

Every problem here has the form ``opt_{beta in P} crit(sum_j beta_j V_j)`` where
``V_j`` are PSD "vertex" matrices (``x x^T / x^T Sigma x`` for A-criteria,
``x x^T`` for the E-criterion) and ``P`` is the simplex, optionally cut by a
budget ``c @ beta <= C``.

A-criteria (convex, smooth on the interior) are minimized with Frank-Wolfe plus
away steps and an exact line search; the Frank-Wolfe duality gap is the
certificate. The E-criterion is concave but nonsmooth, so it is maximized with a
cutting-plane (Kelley) scheme whose LP bound provides the certificate.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ._validation import check_distribution, check_positive_int
from .exceptions import InfeasibleError, UnidentifiableError
from .model import (
    FunctionalSet,
    Objective,
    ObjectiveKind,
    check_identifiability,
    design_matrix,
    objective_value,
)

LINE_SEARCH_XTOL = 1e-12
_E_CUTS_PER_POINT = 3


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-6
    max_iterations: int = 100_000
    init: object = "uniform"
    line_search: bool = True
    away_steps: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        check_positive_int(self.max_iterations, "max_iterations")
        if isinstance(self.init, str) and self.init != "uniform":
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class SolverResult:
    distribution: np.ndarray
    value: float
    certificate_gap: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list, repr=False)
    basis: np.ndarray = field(default=None, repr=False)


def _a_criterion(C, rtol):
    lam = np.linalg.eigvalsh(C)
    if lam[-1] <= 0 or lam[0] <= rtol * lam[-1]:
        return np.inf
    return float(np.sum(1.0 / lam))


def _line_search(C, D, gamma_max, rtol):
    """Exact minimizer of ``tr((C + g D)^-1)`` over ``g in [0, gamma_max]``.

    With ``C = L L^T`` and ``L^-1 D L^-T = W diag(mu) W^T`` the restriction is
    ``sum_i h_i / (1 + g mu_i)``, a convex rational function of ``g``.
    """
    L = np.linalg.cholesky(C)
    Linv = np.linalg.inv(L)
    mu, W = np.linalg.eigh(Linv @ D @ Linv.T)
    h = np.sum((Linv.T @ W) ** 2, axis=0)

    neg = mu < 0
    hi = gamma_max
    if np.any(neg):
        hi = min(hi, float(np.min(-1.0 / mu[neg])))

    def slope(g):
        den = 1.0 + g * mu
        if np.any(den <= rtol):
            return np.inf
        return -float(np.sum(h * mu / den**2))

    if np.isfinite(gamma_max) and hi >= gamma_max and slope(gamma_max) <= 0:
        return gamma_max
    if not np.isfinite(hi):
        hi = 1.0
        while slope(hi) < 0:
            hi *= 2.0
    lo = 0.0
    while hi - lo > LINE_SEARCH_XTOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo


def _spanning_start(V, p, rtol, max_steps):
    """Mix in vertices covering the null space of the current design until it is invertible."""
    C = np.tensordot(p, V, axes=1)
    for t in range(1, max_steps + 1):
        lam, U = np.linalg.eigh(C)
        if lam[-1] > 0 and lam[0] > rtol * lam[-1]:
            return p, C
        null = U[:, lam <= rtol * max(lam[-1], 0.0)]
        score = np.einsum("kij,ia,ja->k", V, null, null)
        j = int(np.argmax(score))
        if score[j] <= rtol * max(1.0, float(np.max(np.abs(V[j])))):
            raise UnidentifiableError("no vertex spans the remaining null space")
        step = 1.0 / (t + 1)
        p = (1.0 - step) * p
        p[j] += step
        C = (1.0 - step) * C + step * V[j]
    raise UnidentifiableError("design did not become invertible during the spanning phase")


def _budget_lmo(g, costs, budget):
    """Minimize ``g @ s`` over ``{s in simplex : costs @ s <= budget}``.

    The optimum is a cheap vertex or a two-vertex mixture on the budget plane.
    """
    best_val, best = np.inf, None
    cheap = np.flatnonzero(costs <= budget)
    if cheap.size:
        j = cheap[np.argmin(g[cheap])]
        best_val, best = g[j], {int(j): 1.0}
    lo = np.flatnonzero(costs < budget)
    hi = np.flatnonzero(costs > budget)
    if lo.size and hi.size:
        ci, cj = costs[lo][:, None], costs[hi][None, :]
        theta = (cj - budget) / (cj - ci)
        vals = theta * g[lo][:, None] + (1.0 - theta) * g[hi][None, :]
        a, b = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[a, b] < best_val:
            th = float(theta[a, b])
            best = {int(lo[a]): th, int(hi[b]): 1.0 - th}
    return best


def _minimize_a(V, p, opts, rtol, costs=None, budget=None):
    budgeted = budget is not None
    C = np.tensordot(p, V, axes=1)
    f = _a_criterion(C, rtol)
    if not np.isfinite(f):
        raise UnidentifiableError("starting design is singular")
    trace = [f]
    gap = np.inf
    it = 0
    converged = False
    for it in range(1, opts.max_iterations + 1):
        lam, U = np.linalg.eigh(C)
        Cinv2 = (U / lam**2) @ U.T
        g = -np.einsum("kij,ij->k", V, Cinv2)
        gp = float(g @ p)

        if budgeted:
            s = _budget_lmo(g, costs, budget)
            lin = sum(g[j] * w for j, w in s.items())
        else:
            j = int(np.argmin(g))
            s = {j: 1.0}
            lin = g[j]
        gap = gp - lin
        if gap <= opts.tolerance * abs(f):
            converged = True
            break

        target = sum(w * V[j] for j, w in s.items())
        direction, gamma_max, away = target - C, 1.0, None
        if opts.away_steps and not budgeted:
            support = np.flatnonzero(p > 0)
            a = int(support[np.argmax(g[support])])
            if g[a] - gp > gap and p[a] < 1.0:
                away = a
                direction = C - V[a]
                gamma_max = p[a] / (1.0 - p[a])

        if opts.line_search:
            gamma = _line_search(C, direction, gamma_max, rtol)
        else:
            gamma = min(2.0 / (it + 2.0), gamma_max)
        if gamma <= 0:
            break

        if away is None:
            p_new = (1.0 - gamma) * p
            for j, w in s.items():
                p_new[j] += gamma * w
        else:
            p_new = (1.0 + gamma) * p
            p_new[away] = 0.0 if gamma == gamma_max else p_new[away] - gamma
        p_new = np.clip(p_new, 0.0, None)
        p_new /= p_new.sum()
        C_new = np.tensordot(p_new, V, axes=1)
        f_new = _a_criterion(C_new, rtol)
        if opts.line_search and not f_new <= f:
            break
        p, C, f = p_new, C_new, f_new
        trace.append(f)
    return p, f, max(gap, 0.0), it, converged, trace


def _lambda_min(C):
    lam, U = np.linalg.eigh(C)
    return float(lam[0]), U


def _maximize_e(V, p, opts, costs=None, budget=None):
    K = V.shape[0]
    cuts = []
    best_p, (best, U) = p, _lambda_min(np.tensordot(p, V, axes=1))
    trace = [best]

    def add_cuts(U):
        for col in range(min(_E_CUTS_PER_POINT, U.shape[1])):
            u = U[:, col]
            cuts.append(np.einsum("kij,i,j->k", V, u, u))

    add_cuts(U)
    c_obj = np.zeros(K + 1)
    c_obj[-1] = -1.0
    A_eq = np.ones((1, K + 1))
    A_eq[0, -1] = 0.0
    bounds = [(0.0, None)] * K + [(None, None)]
    gap, converged, it = np.inf, False, 0
    last_q = None
    for it in range(1, opts.max_iterations + 1):
        A_ub = np.hstack([-np.asarray(cuts), np.ones((len(cuts), 1))])
        b_ub = np.zeros(len(cuts))
        if budget is not None:
            A_ub = np.vstack([A_ub, np.append(costs, 0.0)])
            b_ub = np.append(b_ub, budget)
        lp = linprog(c_obj, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
        if lp.status != 0:
            break
        upper = -lp.fun
        gap = max(upper - best, 0.0)
        if gap <= opts.tolerance * max(abs(best), 1e-12):
            converged = True
            break
        q = np.clip(lp.x[:K], 0.0, None)
        q /= q.sum()
        if last_q is not None and np.allclose(q, last_q, rtol=0.0, atol=1e-13):
            break
        last_q = q
        val, U = _lambda_min(np.tensordot(q, V, axes=1))
        if val > best:
            best, best_p = val, q
            trace.append(best)
        add_cuts(U)
    return best_p, best, gap, it, converged, trace


def solve_mixture(vertices, obj, opts=None, *, basis=None, start=None, costs=None, budget=None):
    """Optimize a criterion over convex combinations of PSD vertex matrices.

    Parameters
    ----------
    vertices : array of shape (K, N, N)
        Vertex matrices ``V_j``.
    obj : Objective
    basis : array of shape (N, r), optional
        Orthonormal columns; the criterion is evaluated on ``basis^T (.) basis``.
    start : array of shape (K,), optional
        Starting weights; overrides ``opts.init``.
    costs, budget : optional
        Adds ``costs @ beta <= budget``.

    Returns
    -------
    SolverResult
        ``value`` is the criterion of the compressed matrix.
    """
    obj = Objective.coerce(obj)
    opts = opts or SolverOptions()
    V = np.asarray(vertices, dtype=np.float64)
    if basis is not None:
        V = np.einsum("ia,kij,jb->kab", basis, V, basis)
    K = V.shape[0]
    if start is None:
        start = np.full(K, 1.0 / K) if isinstance(opts.init, str) else opts.init
    p = check_distribution(start, K, atol=1e-9)
    p = p / p.sum()

    if obj.kind is ObjectiveKind.E_MIN_EIG:
        p, value, gap, it, conv, trace = _maximize_e(V, p, opts, costs, budget)
    else:
        if not np.isfinite(_a_criterion(np.tensordot(p, V, axes=1), obj.rank_tolerance)):
            p = _spanning_start(V, p.copy(), obj.rank_tolerance, V.shape[1] + K)
            p = p[0]
            if budget is not None and costs @ p > budget + 1e-9:
                raise UnidentifiableError("no invertible design was found within the budget")
        p, value, gap, it, conv, trace = _minimize_a(V, p, opts, obj.rank_tolerance, costs, budget)
    return SolverResult(p, float(value), float(gap), it, conv, trace, basis)


def _prepare(fset, variances, obj):
    obj = Objective.coerce(obj)
    if not isinstance(fset, FunctionalSet):
        fset = FunctionalSet(fset)
    X = fset.matrix
    if obj.uses_f_matrix:
        V = np.einsum("ki,kj->kij", X, X)
    else:
        scale = 1.0 / fset.functional_variances(variances)
        V = np.einsum("k,ki,kj->kij", scale, X, X)
    report = check_identifiability(fset)
    basis = None
    if not report.identifiable:
        if obj.kind is ObjectiveKind.A_TRACE:
            raise UnidentifiableError(
                f"functional set has rank {report.rank} < {fset.dimension}: "
                "the design is unidentifiable, use a-pseudo-trace"
            )
        _, _, vt = np.linalg.svd(X, full_matrices=False)
        basis = vt[: report.rank].T
    return fset, obj, V, basis


def _finish(fset, variances, obj, res):
    m = design_matrix(fset, res.distribution, variances, obj)
    if obj.kind is ObjectiveKind.E_MIN_EIG:
        res.value = objective_value(m, obj, basis=res.basis)
    else:
        res.value = objective_value(m, obj)
    return res


def solve_simplex(fset, variances=None, obj=ObjectiveKind.A_TRACE, opts=None):
    """Optimal sampling distribution over an explicit functional set."""
    fset, obj, V, basis = _prepare(fset, variances, obj)
    res = solve_mixture(V, obj, opts, basis=basis)
    return _finish(fset, variances, obj, res)


def solve_budgeted(fset, variances=None, obj=ObjectiveKind.A_TRACE, budget=1.0, opts=None):
    """As :func:`solve_simplex` with the extra constraint ``sum_x c(x) p(x) <= budget``."""
    fset, obj, V, basis = _prepare(fset, variances, obj)
    costs = fset.costs
    if budget < costs.min():
        raise InfeasibleError(f"budget {budget} is below the cheapest functional cost {costs.min()}")
    if costs.max() <= budget:
        res = solve_mixture(V, obj, opts, basis=basis)
        return _finish(fset, variances, obj, res)

    uniform = np.full(len(fset), 1.0 / len(fset))
    cheapest = np.zeros(len(fset))
    cheapest[int(np.argmin(costs))] = 1.0
    mean_cost = float(costs @ uniform)
    if mean_cost <= budget:
        start = uniform
    else:
        theta = (budget - costs.min()) / (mean_cost - costs.min())
        start = theta * uniform + (1.0 - theta) * cheapest
    res = solve_mixture(V, obj, opts, basis=basis, start=start, costs=costs, budget=budget)
    return _finish(fset, variances, obj, res)
