"""Shared fixtures and brute-force oracles.

The oracles below deliberately avoid the package's DP and enumeration code:
paths and walks are expanded recursively straight from the graph definition.
"""

import numpy as np
import pytest
from scipy.optimize import minimize

from optsample import SourceDrainDag

FIVE_PATH_EDGES = [("s", 1), ("s", 2), (1, 2), (1, 3), (2, 3), (2, "d"), (3, "d")]
FIVE_PATH_VECTORS = {(1, 1, 1), (1, 1, 0), (1, 0, 1), (0, 1, 0), (0, 1, 1)}


@pytest.fixture
def five_path_dag():
    return SourceDrainDag(3, FIVE_PATH_EDGES)


def brute_dag_paths(dag, alpha):
    """``[(x, p(x))]`` over all s->d paths, by recursion on the edge list."""
    succ = {}
    for u, v in dag.edges:
        succ.setdefault(u, []).append(v)
    out = []

    def walk(node, visited, prob):
        if node == "d":
            x = np.zeros(dag.n_inner)
            x[[v - 1 for v in visited]] = 1.0
            out.append((x, prob))
            return
        for v in succ.get(node, []):
            walk(v, visited + ([v] if v != "d" else []), prob * alpha[(node, v)])

    walk("s", [], 1.0)
    return out


def brute_walks(graph, alpha):
    """``[(x, p(x))]`` over access-to-access walks with no immediate reversal."""
    out = []
    access = set(graph.access)

    def extend(arcs, prob):
        last = arcs[-1]
        u, v, k = graph.arcs[last]
        if v in access:
            out.append((arcs, prob * alpha.stop[last]))
        for b, (u2, v2, k2) in enumerate(graph.arcs):
            if u2 == v and not (v2 == u and k2 == k):
                extend(arcs + [b], prob * alpha.trans[last, b])

    for a, (u, v, k) in enumerate(graph.arcs):
        if u in access:
            extend([a], alpha.start_dist[u] * alpha.start_rows[a])
    rows = []
    for arcs, prob in out:
        x = np.zeros(graph.n_vars)
        for a in arcs:
            x[graph.arcs[a][2]] += 1.0
        rows.append((x, prob))
    return rows


def moment_matrices(pairs):
    """``(M, F)`` with unit variances from ``[(x, p)]``."""
    n = pairs[0][0].size
    M, F = np.zeros((n, n)), np.zeros((n, n))
    for x, p in pairs:
        M += p * np.outer(x, x) / (x @ x)
        F += p * np.outer(x, x)
    return M, F


def slsqp_a_optimum(X, variances=None):
    """A-optimal value by SLSQP on a softmax-free simplex parameterization."""
    X = np.asarray(X, dtype=float)
    var = np.ones(X.shape[1]) if variances is None else np.asarray(variances, dtype=float)
    scale = 1.0 / ((X**2) @ var)

    def f(p):
        M = (X * (p * scale)[:, None]).T @ X
        return np.trace(np.linalg.inv(M + 1e-14 * np.eye(M.shape[0])))

    n = len(X)
    res = minimize(
        f,
        np.full(n, 1.0 / n),
        method="SLSQP",
        bounds=[(0.0, 1.0)] * n,
        constraints=[{"type": "eq", "fun": lambda p: p.sum() - 1.0}],
        options={"ftol": 1e-13, "maxiter": 1000},
    )
    return res.fun


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for i in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[i])
