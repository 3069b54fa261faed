"""Path-induced binary functionals on graphs and their product-rule distributions.

Two models are covered:

* node randomness: a source-drain DAG whose inner nodes carry the variables; a
  probe is an ``s -> d`` path and its functional is the path's node indicator.
* edge randomness: an access graph whose edges carry the variables; a probe is
  a walk between access points and its functional is the walk's edge indicator.

Distributions over paths are product rules: every node (every arrival state for
access graphs) owns a probability vector over its exits. ``M(alpha)`` and
``F(alpha)`` are then computed by dynamic programming without enumerating paths.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import SIMPLEX_ATOL, check_positive_int, normalize_rows
from .exceptions import EnumerationCapError
from .model import FunctionalSet, InfoMatrix

PATH_CAP = 10**5
SOURCE, DRAIN = "s", "d"


# ---------------------------------------------------------------------------
# node randomness


class SourceDrainDag:
    """Source-drain DAG with inner nodes ``1..n_inner`` listed in topological order.

    Edges are pairs ``(u, v)`` with ``u`` in ``{"s", 1..N}`` and ``v`` in
    ``{1..N, "d"}``; inner-to-inner edges must go forward (``u < v``).
    """

    def __init__(self, n_inner, edges):
        self.n_inner = check_positive_int(n_inner, "n_inner")
        n = self.n_inner
        adj = np.zeros((n + 2, n + 2), dtype=bool)
        for u, v in edges:
            i, j = self.index(u), self.index(v)
            if i == n + 1 or j == 0:
                raise ValueError(f"edge {u}->{v} leaves the drain or enters the source")
            if i == 0 and j == n + 1:
                raise ValueError("an s->d edge would observe no variable")
            if i >= j:
                raise ValueError(f"edge {u}->{v} violates the topological order")
            adj[i, j] = True
        self.adjacency = adj
        self.adjacency.setflags(write=False)
        if not adj.any():
            raise ValueError("no source-drain path")
        from_s = self._reach(adj, 0)
        to_d = self._reach(adj.T, n + 1)
        if not from_s[n + 1]:
            raise ValueError("no source-drain path")
        dangling = [i for i in range(1, n + 1) if not (from_s[i] and to_d[i])]
        if dangling:
            raise ValueError(f"inner node {dangling[0]} is not on any source-drain path")

    @staticmethod
    def _reach(adj, start):
        seen = np.zeros(adj.shape[0], dtype=bool)
        stack = [start]
        seen[start] = True
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(adj[u]):
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return seen

    def index(self, label):
        if label == SOURCE:
            return 0
        if label == DRAIN:
            return self.n_inner + 1
        i = int(label)
        if not 1 <= i <= self.n_inner or i != label:
            raise ValueError(f"unknown node {label!r}")
        return i

    def label(self, idx):
        if idx == 0:
            return SOURCE
        if idx == self.n_inner + 1:
            return DRAIN
        return int(idx)

    @property
    def edges(self):
        return [(self.label(i), self.label(j)) for i, j in zip(*np.nonzero(self.adjacency))]

    def successors(self, node):
        return [self.label(j) for j in np.flatnonzero(self.adjacency[self.index(node)])]

    @property
    def decision_nodes(self):
        """Nodes with an exit distribution: the source and every inner node."""
        return [SOURCE] + list(range(1, self.n_inner + 1))

    def paths_to_drain(self):
        """Number of paths from every node index to the drain."""
        n = self.n_inner
        count = np.zeros(n + 2)
        count[n + 1] = 1.0
        for i in range(n, -1, -1):
            count[i] = count[self.adjacency[i]].sum()
        return count

    def path_count(self):
        return int(round(self.paths_to_drain()[0]))

    def __eq__(self, other):
        return (
            isinstance(other, SourceDrainDag)
            and self.n_inner == other.n_inner
            and np.array_equal(self.adjacency, other.adjacency)
        )

    def __repr__(self):
        return f"SourceDrainDag(n_inner={self.n_inner}, n_edges={int(self.adjacency.sum())})"


class ExitDistribution:
    """Per-node exit probabilities ``alpha[u, v]`` on a :class:`SourceDrainDag`."""

    def __init__(self, dag, matrix, *, atol=SIMPLEX_ATOL):
        n = dag.n_inner
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.shape != (n + 2, n + 2):
            raise ValueError(f"alpha must have shape {(n + 2, n + 2)}")
        if np.any(matrix < 0) or not np.all(np.isfinite(matrix)):
            raise ValueError("exit probabilities must be finite and nonnegative")
        if np.any(matrix[~dag.adjacency] != 0):
            raise ValueError("exit probabilities placed on missing edges")
        sums = matrix[: n + 1].sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > atol)
        if bad.size:
            raise ValueError(f"exit row of node {dag.label(bad[0])!r} sums to {sums[bad[0]]:.15g}")
        matrix.setflags(write=False)
        self.dag = dag
        self.matrix = matrix

    @classmethod
    def uniform(cls, dag):
        return cls(dag, normalize_rows(dag.adjacency.astype(float)))

    @classmethod
    def random(cls, dag, rng):
        rng = np.random.default_rng(rng)
        raw = np.where(dag.adjacency, rng.exponential(size=dag.adjacency.shape), 0.0)
        return cls(dag, normalize_rows(raw))

    @classmethod
    def from_rows(cls, dag, rows):
        mat = np.zeros_like(dag.adjacency, dtype=float)
        for u, row in rows.items():
            for v, prob in row.items():
                mat[dag.index(u), dag.index(v)] = prob
        return cls(dag, mat)

    def rows(self):
        return {
            u: {v: float(self.matrix[self.dag.index(u), self.dag.index(v)]) for v in self.dag.successors(u)}
            for u in self.dag.decision_nodes
        }

    def __getitem__(self, edge):
        u, v = edge
        return float(self.matrix[self.dag.index(u), self.dag.index(v)])

    # block interface shared with AccessExitDistribution
    def blocks(self):
        return [u for u in self.dag.decision_nodes if len(self.dag.successors(u)) > 1]

    def block_options(self, block):
        return self.dag.successors(block)

    def get_block(self, block):
        i = self.dag.index(block)
        return self.matrix[i, self.dag.adjacency[i]].copy()

    def with_block(self, block, values, *, validate=True):
        i = self.dag.index(block)
        mat = self.matrix.copy()
        mat[i, self.dag.adjacency[i]] = values
        if not validate:
            out = object.__new__(ExitDistribution)
            out.dag, out.matrix = self.dag, mat
            return out
        return ExitDistribution(self.dag, mat)


@dataclass(frozen=True)
class PathEnumeration:
    functional_set: FunctionalSet
    probabilities: np.ndarray  # aligned with functional_set rows, None without alpha
    paths: list


def _check_alpha(dag, alpha):
    if not isinstance(alpha, ExitDistribution) or alpha.dag is not dag and alpha.dag != dag:
        raise ValueError("alpha does not belong to this DAG")
    return alpha.matrix


def enumerate_paths(dag, alpha=None, cap=PATH_CAP):
    """Brute-force list of all ``s -> d`` paths as inner-node indicator vectors."""
    if isinstance(dag, AccessGraph):
        return enumerate_walks(dag, alpha, cap)
    total = dag.path_count()
    if total > cap:
        raise EnumerationCapError(f"{total} source-drain paths exceed the cap {cap}")
    mat = None if alpha is None else _check_alpha(dag, alpha)
    n = dag.n_inner
    adj = dag.adjacency
    paths, probs = [], []
    stack = [(0, (), 1.0)]
    while stack:
        u, visited, prob = stack.pop()
        for v in np.flatnonzero(adj[u])[::-1]:
            p = prob if mat is None else prob * mat[u, v]
            if v == n + 1:
                paths.append(visited)
                probs.append(p)
            else:
                stack.append((v, visited + (int(v),), p))
    rows = np.zeros((len(paths), n))
    for r, nodes in enumerate(paths):
        rows[r, np.asarray(nodes) - 1] = 1.0
    return PathEnumeration(FunctionalSet(rows), None if mat is None else np.asarray(probs), paths)


def _chain_moments(init, trans, term, weight):
    """``U[a, b] = sum`` over chains visiting state ``a`` and later (or equal) ``b`` of
    ``prob(chain) * weight(len(chain))``.

    Chains start in state ``a`` with probability ``init[a]``, move ``a -> b`` with
    ``trans[a, b]`` and stop after ``a`` with ``term[a]``; ``trans`` must be
    nilpotent (acyclic support). Lengths count states. Chains are split into a
    prefix ending at ``a``, a middle segment ``a -> b`` and a suffix from ``b``;
    the shared endpoints make ``len = i + m + j - 2``.
    """
    S = init.size
    fwd = np.zeros((S + 1, S))
    bwd = np.zeros((S + 1, S))
    mid = np.zeros((S + 1, S, S))
    fwd[1], bwd[1], mid[1] = init, term, np.eye(S)
    for k in range(2, S + 1):
        fwd[k] = fwd[k - 1] @ trans
        bwd[k] = trans @ bwd[k - 1]
        mid[k] = mid[k - 1] @ trans
    # pre[t, a, b]: prefix length i and middle length m with i + m = t
    pre = np.zeros((2 * S + 1, S, S))
    for i in range(1, S + 1):
        if fwd[i].any():
            pre[i + 1 : i + S + 1] += fwd[i][None, :, None] * mid[1:]
    lengths = np.arange(2 * S + 1)[:, None] + np.arange(S + 1)[None, :] - 2
    w = np.where(lengths >= 1, weight(np.maximum(lengths, 1)), 0.0)
    w[:, 0] = 0.0
    suffix = w @ bwd  # suffix[t, b] = sum_j bwd[j, b] * weight(t + j - 2)
    return np.einsum("tab,tb->ab", pre, suffix)


def _symmetrize_upper(U):
    return U + U.T - np.diag(np.diag(U))


def _node_chain(alpha):
    n = alpha.shape[0] - 2
    inner = slice(1, n + 1)
    return alpha[0, inner], alpha[inner, inner], alpha[inner, n + 1]


def _node_m(alpha):
    init, trans, term = _node_chain(alpha)
    return _symmetrize_upper(_chain_moments(init, trans, term, lambda l: 1.0 / l))


def _node_f(alpha):
    """Joint visit frequencies ``n(i, j)`` by the forward recurrences over the topological order."""
    n = alpha.shape[0] - 2
    visit = np.zeros(n + 2)
    visit[0] = 1.0
    for j in range(1, n + 1):
        visit[j] = visit[:j] @ alpha[:j, j]
    joint = np.zeros((n + 2, n + 2))
    for i in range(1, n + 1):
        joint[i, i] = visit[i]
        for j in range(i + 1, n + 1):
            joint[i, j] = joint[i, i:j] @ alpha[i:j, j]
    F = joint[1 : n + 1, 1 : n + 1]
    return _symmetrize_upper(np.triu(F))


def dp_node_info_matrix(dag, alpha):
    """``M(alpha) = sum_paths p(x) / |x| * x x^T`` over the node-indicator vectors."""
    return InfoMatrix(_node_m(_check_alpha(dag, alpha)))


def dp_node_f_matrix(dag, alpha):
    """``F(alpha) = sum_paths p(x) x x^T``; entry ``(i, j)`` is the probability of visiting both."""
    return InfoMatrix(_node_f(_check_alpha(dag, alpha)))


# ---------------------------------------------------------------------------
# edge randomness


class AccessGraph:
    """Directed graph whose arcs carry variables, probed by walks between access points.

    ``arcs`` are ``(u, v, var)`` triples over nodes ``0..n_nodes-1`` and variables
    ``0..n_vars-1``; an undirected edge is two opposite arcs sharing a variable.
    A walk starts at an access point, never immediately reverses the arc it
    arrived by, and may stop at any access point other than its start step.
    The set of such walks must be finite and no walk may use a variable twice.
    """

    def __init__(self, n_nodes, arcs, access):
        self.n_nodes = check_positive_int(n_nodes, "n_nodes")
        arcs = [(int(u), int(v), int(k)) for u, v, k in arcs]
        if not arcs:
            raise ValueError("no access-to-access path")
        if len(set((u, v) for u, v, _ in arcs)) != len(arcs):
            raise ValueError("duplicate arc")
        for u, v, k in arcs:
            if not (0 <= u < n_nodes and 0 <= v < n_nodes) or u == v:
                raise ValueError(f"invalid arc {u}->{v}")
            if k < 0:
                raise ValueError("variable indices must be nonnegative")
        self.arcs = arcs
        self.n_vars = max(k for _, _, k in arcs) + 1
        used = {k for _, _, k in arcs}
        if used != set(range(self.n_vars)):
            raise ValueError("variable indices must be contiguous from 0")
        access = sorted({int(a) for a in access})
        if len(access) < 2:
            raise ValueError("an access graph needs at least two access points")
        if any(not 0 <= a < n_nodes for a in access):
            raise ValueError("access point out of range")
        self.access = access
        self._build_structure()

    def _build_structure(self):
        A = len(self.arcs)
        tail = np.array([u for u, _, _ in self.arcs])
        head = np.array([v for _, v, _ in self.arcs])
        var = np.array([k for _, _, k in self.arcs])
        is_access = np.zeros(self.n_nodes, dtype=bool)
        is_access[self.access] = True
        reverse = np.full(A, -1)
        for a in range(A):
            for b in range(A):
                if tail[b] == head[a] and head[b] == tail[a] and var[b] == var[a]:
                    reverse[a] = b
        allowed = (head[:, None] == tail[None, :]) & (np.arange(A)[None, :] != reverse[:, None])
        self.tail, self.head, self.var = tail, head, var
        self.allowed = allowed
        self.can_stop = is_access[head]
        self.can_start = is_access[tail]

        # acyclicity of the arc-state graph, via Kahn's algorithm
        indeg = allowed.sum(axis=0)
        order, queue = [], [a for a in range(A) if indeg[a] == 0]
        indeg = indeg.copy()
        while queue:
            a = queue.pop(0)
            order.append(a)
            for b in np.flatnonzero(allowed[a]):
                indeg[b] -= 1
                if indeg[b] == 0:
                    queue.append(b)
        if len(order) != A:
            raise ValueError("walk structure contains a cycle")
        self.order = np.array(order)

        reach = np.eye(A, dtype=bool)
        for a in order[::-1]:
            for b in np.flatnonzero(allowed[a]):
                reach[a] |= reach[b]
        same_var = (var[:, None] == var[None, :]) & ~np.eye(A, dtype=bool)
        if np.any(reach & same_var):
            raise ValueError("some walk uses the same variable twice")

        from_start = np.zeros(A, dtype=bool)
        for a in order:
            from_start[a] = self.can_start[a] or from_start[allowed[:, a]].any()
        to_stop = np.zeros(A, dtype=bool)
        for a in order[::-1]:
            to_stop[a] = self.can_stop[a] or to_stop[allowed[a]].any()
        dead = np.flatnonzero(~(from_start & to_stop))
        if dead.size:
            u, v, _ = self.arcs[dead[0]]
            raise ValueError(f"arc {u}->{v} lies on no access-to-access walk")
        if not np.any(self.can_start & to_stop):
            raise ValueError("no access-to-access path")
        # exclude starts whose arcs cannot be continued to a stop
        self.start_points = sorted({int(self.tail[a]) for a in range(A) if self.can_start[a]})
        self._perm = np.argsort(self.order)

    def arcs_from(self, node):
        return [a for a in range(len(self.arcs)) if self.tail[a] == node]

    def options(self, arc):
        """Arcs that may follow ``arc``; a stop is possible when ``can_stop[arc]``."""
        return list(np.flatnonzero(self.allowed[arc]))

    def var_incidence(self):
        P = np.zeros((len(self.arcs), self.n_vars))
        P[np.arange(len(self.arcs)), self.var] = 1.0
        return P

    def walk_count(self):
        A = len(self.arcs)
        count = np.zeros(A)
        for a in self.order[::-1]:
            count[a] = float(self.can_stop[a]) + count[self.allowed[a]].sum()
        return int(round(count[self.can_start].sum()))

    def __eq__(self, other):
        return (
            isinstance(other, AccessGraph)
            and self.n_nodes == other.n_nodes
            and sorted(self.arcs) == sorted(other.arcs)
            and self.access == other.access
        )

    def __repr__(self):
        return f"AccessGraph(n_nodes={self.n_nodes}, n_arcs={len(self.arcs)}, access={self.access})"


class AccessExitDistribution:
    """Product-rule parameters on an :class:`AccessGraph`.

    * ``start_dist[u]``: probability of starting at access point ``u``;
    * ``start_rows[a]``: probability of leaving the start point ``tail(a)`` by ``a``;
    * ``trans[a, b]``, ``stop[a]``: after arriving by arc ``a``, continue with ``b``
      or stop.
    """

    def __init__(self, graph, start_dist, start_rows, trans, stop, *, atol=SIMPLEX_ATOL):
        A = len(graph.arcs)
        start_dist = np.array(start_dist, dtype=float)
        start_rows = np.array(start_rows, dtype=float)
        trans = np.array(trans, dtype=float)
        stop = np.array(stop, dtype=float)
        if start_dist.shape != (graph.n_nodes,) or start_rows.shape != (A,):
            raise ValueError("parameter shapes do not match the graph")
        if trans.shape != (A, A) or stop.shape != (A,):
            raise ValueError("parameter shapes do not match the graph")
        for arr in (start_dist, start_rows, trans, stop):
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError("probabilities must be finite and nonnegative")
        if np.any(trans[~graph.allowed] != 0) or np.any(stop[~graph.can_stop] != 0):
            raise ValueError("probability placed on a disallowed move")
        off = np.ones(graph.n_nodes, dtype=bool)
        off[graph.start_points] = False
        if np.any(start_dist[off] != 0) or abs(start_dist.sum() - 1.0) > atol:
            raise ValueError("start distribution must be a simplex vector over usable access points")
        if np.any(start_rows[~graph.can_start] != 0):
            raise ValueError("start rows placed on arcs that do not leave an access point")
        for u in graph.start_points:
            s = start_rows[graph.arcs_from(u)].sum()
            if abs(s - 1.0) > atol:
                raise ValueError(f"start row of access point {u} sums to {s:.15g}")
        rows = trans.sum(axis=1) + stop
        bad = np.flatnonzero(np.abs(rows - 1.0) > atol)
        if bad.size:
            raise ValueError(f"transit row of arc {graph.arcs[bad[0]][:2]} sums to {rows[bad[0]]:.15g}")
        for arr in (start_dist, start_rows, trans, stop):
            arr.setflags(write=False)
        self.graph = graph
        self.start_dist, self.start_rows, self.trans, self.stop = start_dist, start_rows, trans, stop

    @classmethod
    def uniform(cls, graph):
        A = len(graph.arcs)
        start_dist = np.zeros(graph.n_nodes)
        start_dist[graph.start_points] = 1.0 / len(graph.start_points)
        start_rows = np.zeros(A)
        for u in graph.start_points:
            out = graph.arcs_from(u)
            start_rows[out] = 1.0 / len(out)
        moves = np.hstack([graph.allowed.astype(float), graph.can_stop[:, None].astype(float)])
        moves = normalize_rows(moves)
        return cls(graph, start_dist, start_rows, moves[:, :A], moves[:, A])

    @classmethod
    def random(cls, graph, rng):
        rng = np.random.default_rng(rng)
        out = cls.uniform(graph)
        for block in out.blocks():
            k = len(out.block_options(block))
            out = out.with_block(block, rng.dirichlet(np.ones(k)))
        return out

    def init_vector(self):
        return self.start_dist[self.graph.tail] * self.start_rows

    def blocks(self):
        g = self.graph
        keys = []
        if len(g.start_points) > 1:
            keys.append(("start",))
        keys += [("leave", u) for u in g.start_points if len(g.arcs_from(u)) > 1]
        keys += [("arc", a) for a in range(len(g.arcs)) if len(g.options(a)) + int(g.can_stop[a]) > 1]
        return keys

    def block_options(self, block):
        g = self.graph
        if block[0] == "start":
            return list(g.start_points)
        if block[0] == "leave":
            return g.arcs_from(block[1])
        opts = list(g.options(block[1]))
        return opts + (["stop"] if g.can_stop[block[1]] else [])

    def get_block(self, block):
        g = self.graph
        if block[0] == "start":
            return self.start_dist[g.start_points].copy()
        if block[0] == "leave":
            return self.start_rows[g.arcs_from(block[1])].copy()
        a = block[1]
        vals = list(self.trans[a, g.options(a)])
        if g.can_stop[a]:
            vals.append(self.stop[a])
        return np.array(vals)

    def with_block(self, block, values, *, validate=True):
        g = self.graph
        values = np.asarray(values, dtype=float)
        sd, sr = self.start_dist.copy(), self.start_rows.copy()
        tr, st = self.trans.copy(), self.stop.copy()
        if block[0] == "start":
            sd[g.start_points] = values
        elif block[0] == "leave":
            sr[g.arcs_from(block[1])] = values
        else:
            a = block[1]
            opts = g.options(a)
            tr[a, opts] = values[: len(opts)]
            if g.can_stop[a]:
                st[a] = values[len(opts)]
        if not validate:
            out = object.__new__(AccessExitDistribution)
            out.graph = g
            out.start_dist, out.start_rows, out.trans, out.stop = sd, sr, tr, st
            return out
        return AccessExitDistribution(g, sd, sr, tr, st)


def _check_edge_alpha(graph, alpha):
    if alpha is None:
        return AccessExitDistribution.uniform(graph)
    if not isinstance(alpha, AccessExitDistribution) or (alpha.graph is not graph and alpha.graph != graph):
        raise ValueError("exit distribution does not belong to this access graph")
    return alpha


def _edge_moments(graph, alpha, weight):
    U = _chain_moments(alpha.init_vector(), alpha.trans, alpha.stop, weight)
    S = _symmetrize_upper(U)
    P = graph.var_incidence()
    return P.T @ S @ P


def dp_edge_info_matrix(graph, alpha=None):
    """``M`` over edge variables for walks drawn from the product rule ``alpha``."""
    alpha = _check_edge_alpha(graph, alpha)
    return InfoMatrix(_edge_moments(graph, alpha, lambda l: 1.0 / l))


def dp_edge_f_matrix(graph, alpha=None):
    alpha = _check_edge_alpha(graph, alpha)
    return InfoMatrix(_edge_moments(graph, alpha, np.ones_like))


def enumerate_walks(graph, alpha=None, cap=PATH_CAP):
    """All access-to-access walks; identical edge sets are merged into one functional."""
    total = graph.walk_count()
    if total > cap:
        raise EnumerationCapError(f"{total} access-to-access walks exceed the cap {cap}")
    probs_on = alpha is not None
    alpha = _check_edge_alpha(graph, alpha)
    init = alpha.init_vector()
    walks, probs = [], []
    stack = [((a,), init[a]) for a in range(len(graph.arcs)) if graph.can_start[a]][::-1]
    while stack:
        walk, prob = stack.pop()
        last = walk[-1]
        if graph.can_stop[last]:
            walks.append(walk)
            probs.append(prob * alpha.stop[last])
        for b in graph.options(last)[::-1]:
            stack.append((walk + (int(b),), prob * alpha.trans[last, b]))
    merged = {}
    for walk, prob in zip(walks, probs):
        key = tuple(sorted(int(graph.var[a]) for a in walk))
        merged[key] = merged.get(key, 0.0) + prob
    keys = list(merged)
    rows = np.zeros((len(keys), graph.n_vars))
    for r, key in enumerate(keys):
        rows[r, list(key)] = 1.0
    p = np.array([merged[k] for k in keys]) if probs_on else None
    return PathEnumeration(FunctionalSet(rows), p, walks)


# ---------------------------------------------------------------------------
# shared


def target_matrix(graph, alpha, target="M"):
    """Raw ``M`` or ``F`` array for either graph model (no validation)."""
    if isinstance(graph, AccessGraph):
        weight = (lambda l: 1.0 / l) if target == "M" else np.ones_like
        return _edge_moments(graph, alpha, weight)
    if target == "M":
        return _node_m(alpha.matrix)
    if target == "F":
        return _node_f(alpha.matrix)
    raise ValueError(f"unknown target {target!r}")


@dataclass(frozen=True)
class BlockLinearization:
    base: InfoMatrix
    directions: list  # one InfoMatrix per option of the block

    def vertices(self):
        """Target matrices with the block set to each unit vector."""
        return np.stack([self.base.entries + d.entries for d in self.directions])


def block_linearization(graph, alpha, node, target="M"):
    """Affine decomposition ``target(alpha with block beta) = base + sum_j beta_j B_j``.

    ``node`` is a DAG node label (or an access-graph block key). Obtained by
    evaluating the DP with the block set to zero and to each unit vector.
    """
    if target not in ("M", "F"):
        raise ValueError(f"unknown target {target!r}")
    if node not in alpha.blocks() and not (
        isinstance(alpha, ExitDistribution) and node in alpha.dag.decision_nodes
    ):
        raise ValueError(f"{node!r} has no exit distribution to vary")
    k = len(alpha.block_options(node))
    base = target_matrix(graph, alpha.with_block(node, np.zeros(k), validate=False), target)
    dirs = []
    for j in range(k):
        unit = np.zeros(k)
        unit[j] = 1.0
        vert = target_matrix(graph, alpha.with_block(node, unit, validate=False), target)
        dirs.append(InfoMatrix(vert - base, validate=False))
    return BlockLinearization(InfoMatrix(base, validate=False), dirs)


def random_alpha(graph, rng):
    if isinstance(graph, AccessGraph):
        return AccessExitDistribution.random(graph, rng)
    return ExitDistribution.random(graph, rng)


def uniform_alpha(graph):
    if isinstance(graph, AccessGraph):
        return AccessExitDistribution.uniform(graph)
    return ExitDistribution.uniform(graph)
