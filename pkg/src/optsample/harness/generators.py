"""Seeded instance generators: square grids, random DAGs, stars and random access graphs."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .._validation import check_positive_int
from ..dag_dp import AccessGraph, ExitDistribution, SourceDrainDag, _node_m
from ..model import InfoMatrix, RANK_RTOL

MAX_RETRIES = 1000


def gen_grid(a):
    """``a x a`` lattice; node ``(r, c)`` is inner node ``r * a + c + 1`` and moves right or down."""
    a = check_positive_int(a, "a", minimum=2)
    idx = lambda r, c: r * a + c + 1  # noqa: E731
    edges = [("s", idx(0, 0)), (idx(a - 1, a - 1), "d")]
    for r in range(a):
        for c in range(a):
            if r + 1 < a:
                edges.append((idx(r, c), idx(r + 1, c)))
            if c + 1 < a:
                edges.append((idx(r, c), idx(r, c + 1)))
    return SourceDrainDag(a * a, edges)


def _dag_rank(dag):
    return InfoMatrix(_node_m(ExitDistribution.uniform(dag).matrix)).rank(RANK_RTOL)


def gen_random_dag(n, edge_prob=0.5, seed=0, max_retries=MAX_RETRIES):
    """Path graph ``s -> 1 -> ... -> n -> d`` plus random forward shortcuts.

    Every other edge ``i -> j`` (``i < j``), ``s -> i`` and ``i -> d`` is added
    independently with ``edge_prob``; unidentifiable draws are discarded and the
    next attempt uses the derived seed ``(seed, attempt)``.
    """
    n = check_positive_int(n, "n")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    backbone = [("s", 1), (n, "d")] + [(i, i + 1) for i in range(1, n)]
    extra = [(i, j) for i in range(1, n + 1) for j in range(i + 2, n + 1)]
    extra += [("s", i) for i in range(2, n + 1)] + [(i, "d") for i in range(1, n)]
    for attempt in range(max_retries):
        rng = np.random.default_rng([seed, attempt])
        keep = rng.random(len(extra)) < edge_prob
        dag = SourceDrainDag(n, backbone + [e for e, k in zip(extra, keep) if k])
        if _dag_rank(dag) == n:
            return dag
    raise RuntimeError(f"no identifiable DAG after {max_retries} attempts (n={n}, edge_prob={edge_prob})")


def gen_star(leaves):
    """Star with center node 0; each spoke is one variable carried by two opposite arcs."""
    leaves = check_positive_int(leaves, "leaves", minimum=3)
    arcs = []
    for leaf in range(1, leaves + 1):
        arcs += [(leaf, 0, leaf - 1), (0, leaf, leaf - 1)]
    return AccessGraph(leaves + 1, arcs, range(1, leaves + 1))


def gen_random_access_graph(n_nodes, edge_prob=0.5, seed=0, max_edges=8, max_retries=MAX_RETRIES):
    """Random forward-oriented graph whose arcs all lie on some access-to-access walk.

    Arcs ``i -> j`` (``i < j``) appear with ``edge_prob``; roughly half of the nodes
    (always the first and the last) are access points; arcs on no walk are pruned.
    """
    n_nodes = check_positive_int(n_nodes, "n_nodes", minimum=2)
    for attempt in range(max_retries):
        rng = np.random.default_rng([seed, attempt])
        pairs = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes) if rng.random() < edge_prob]
        access = {0, n_nodes - 1} | {int(v) for v in np.flatnonzero(rng.random(n_nodes) < 0.5)}
        pairs = _prune(pairs, access)
        if not pairs or len(pairs) > max_edges:
            continue
        return AccessGraph(n_nodes, [(u, v, k) for k, (u, v) in enumerate(pairs)], access)
    raise RuntimeError("could not draw a valid access graph")


def _prune(pairs, access):
    # forward arcs: an arc is useful iff its tail is reachable from access and its head reaches access
    fwd = set(access)
    for u, v in sorted(pairs):
        if u in fwd:
            fwd.add(v)
    bwd = set(access)
    for u, v in sorted(pairs, reverse=True):
        if v in bwd:
            bwd.add(u)
    return [(u, v) for u, v in pairs if u in fwd and v in bwd]


@dataclass(frozen=True)
class InstanceSpec:
    """``grid:<a>``, ``random-dag:<n>[:<edge_prob>[:<seed>]]``, ``star:<leaves>``,
    ``random-access:<nodes>[:<edge_prob>[:<seed>]]`` or ``file:<path>``."""

    kind: str
    params: tuple = ()

    KINDS = ("grid", "random-dag", "star", "random-access", "file")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}")

    @classmethod
    def parse(cls, text):
        kind, _, rest = text.partition(":")
        if kind == "file":
            return cls(kind, (rest,))
        params = tuple(p for p in rest.split(":") if p)
        try:
            if kind in ("grid", "star"):
                (size,) = params
                return cls(kind, (int(size),))
            if kind in ("random-dag", "random-access"):
                n = int(params[0])
                prob = float(params[1]) if len(params) > 1 else 0.5
                seed = int(params[2]) if len(params) > 2 else 0
                return cls(kind, (n, prob, seed))
        except (ValueError, IndexError):
            raise ValueError(f"malformed instance spec {text!r}") from None
        raise ValueError(f"unknown instance kind {kind!r}")

    def __str__(self):
        return ":".join([self.kind, *map(str, self.params)])

    def build(self):
        if self.kind == "grid":
            return gen_grid(*self.params)
        if self.kind == "random-dag":
            return gen_random_dag(*self.params)
        if self.kind == "star":
            return gen_star(*self.params)
        if self.kind == "random-access":
            n, prob, seed = self.params
            return gen_random_access_graph(n, prob, seed)
        from .io import parse_instance

        return parse_instance(Path(self.params[0]).read_text())
