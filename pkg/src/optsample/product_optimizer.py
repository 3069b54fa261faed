"""Block coordinate descent over product-rule (exit) distributions.

The criterion is affine-in-a-block: fixing every exit row but one, the path
distribution's information matrix is ``A + sum_j beta_j B_j``, so each block
update is a small certified design problem solved by
:func:`optsample.exact_solver.solve_mixture`. Every update starts from the
current row, which makes the objective monotone across updates and sweeps.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int
from .dag_dp import (
    AccessGraph,
    ExitDistribution,
    SourceDrainDag,
    block_linearization,
    random_alpha,
    target_matrix,
    uniform_alpha,
)
from .exact_solver import SolverOptions, solve_mixture
from .exceptions import UnidentifiableError
from .model import InfoMatrix, Objective, ObjectiveKind, objective_value

SWEEP_ORDERS = ("topological", "reverse", "random")


@dataclass(frozen=True)
class OptimizeOptions:
    sweep_order: str = "topological"
    max_sweeps: int = 200
    sweep_tolerance: float = 1e-8
    restarts: int = 3
    seed: int = 0
    inner: SolverOptions = field(default_factory=lambda: SolverOptions(tolerance=1e-9, max_iterations=2000))

    def __post_init__(self):
        if self.sweep_order not in SWEEP_ORDERS:
            raise ValueError(f"sweep_order must be one of {SWEEP_ORDERS}")
        check_positive_int(self.max_sweeps, "max_sweeps")
        check_positive_int(self.restarts, "restarts")
        if not self.sweep_tolerance >= 0:
            raise ValueError("sweep_tolerance must be nonnegative")


@dataclass
class OptimizeResult:
    alpha: object
    value: float
    sweep_trace: list
    restart_values: list
    sweeps: int
    basis: np.ndarray = field(default=None, repr=False)


def uniform_path_alpha(dag):
    """Product rule that makes every ``s -> d`` path equally likely.

    Leaving ``u`` towards ``v`` with probability ``paths(v) / paths(u)`` telescopes
    to ``1 / paths(s)`` along every path.
    """
    count = dag.paths_to_drain()
    mat = np.where(dag.adjacency, count[None, :] / np.where(count > 0, count, 1.0)[:, None], 0.0)
    mat[-1] = 0.0
    return ExitDistribution(dag, mat, atol=1e-12)


def identifiable_basis(graph, obj):
    """Orthonormal basis of the identifiable subspace, or ``None`` when it is everything.

    Probed once with the uniform exit rows, which give every path positive mass.
    """
    obj = Objective.coerce(obj)
    m = InfoMatrix(target_matrix(graph, uniform_alpha(graph), "M"))
    rank = m.rank(obj.rank_tolerance)
    if rank == m.shape[0]:
        return None
    if obj.kind is ObjectiveKind.A_TRACE:
        raise UnidentifiableError(
            f"path set spans rank {rank} < {m.shape[0]}: the design is unidentifiable, use a-pseudo-trace"
        )
    return m.range_basis(obj.rank_tolerance)


def evaluate_alpha(graph, alpha, obj, basis=None):
    """Criterion value of a product distribution (E on the identifiable subspace)."""
    obj = Objective.coerce(obj)
    mat = target_matrix(graph, alpha, "F" if obj.uses_f_matrix else "M")
    if obj.uses_f_matrix:
        return objective_value(mat, obj, basis=basis)
    return objective_value(mat, obj)


def _safe_value(graph, alpha, obj, basis):
    try:
        return evaluate_alpha(graph, alpha, obj, basis)
    except UnidentifiableError:
        return -np.inf if obj.maximize else np.inf


def solve_block(graph, alpha, block, obj, basis=None, inner=None):
    """Re-optimize one exit row with all others fixed; returns ``(alpha, value)``."""
    obj = Objective.coerce(obj)
    target = "F" if obj.uses_f_matrix else "M"
    vertices = block_linearization(graph, alpha, block, target).vertices()
    start = alpha.get_block(block)
    start = start / start.sum()
    res = solve_mixture(vertices, obj, inner, basis=basis, start=start)
    beta = np.clip(res.distribution, 0.0, None)
    beta /= beta.sum()
    return alpha.with_block(block, beta), res


def _initial_alpha(graph, restart, rng):
    if restart == 0:
        return uniform_path_alpha(graph) if isinstance(graph, SourceDrainDag) else uniform_alpha(graph)
    if restart == 1 and isinstance(graph, SourceDrainDag):
        return uniform_alpha(graph)
    return random_alpha(graph, rng)


def _block_order(graph, alpha):
    blocks = alpha.blocks()
    if isinstance(graph, AccessGraph):
        rank = {int(a): r for r, a in enumerate(graph.order)}
        blocks.sort(key=lambda b: (0, 0) if b[0] != "arc" else (1, rank[b[1]]))
    return blocks


def _run(graph, obj, opts, basis, alpha, rng):
    blocks = _block_order(graph, alpha)
    value = _safe_value(graph, alpha, obj, basis)
    trace = [value]
    sweeps = 0
    for sweeps in range(1, opts.max_sweeps + 1 if blocks else 1):
        if opts.sweep_order == "reverse":
            order = blocks[::-1]
        elif opts.sweep_order == "random":
            order = [blocks[i] for i in rng.permutation(len(blocks))]
        else:
            order = blocks
        for block in order:
            candidate, _ = solve_block(graph, alpha, block, obj, basis, opts.inner)
            cand_value = _safe_value(graph, candidate, obj, basis)
            if obj.better(cand_value, value) or cand_value == value:
                alpha, value = candidate, cand_value
        prev = trace[-1]
        trace.append(value)
        gain = (value - prev) if obj.maximize else (prev - value)
        if gain <= opts.sweep_tolerance * max(abs(prev), 1e-300):
            break
    return alpha, value, trace, sweeps


def optimize_products(graph, obj=ObjectiveKind.A_TRACE, opts=None):
    """Best product-rule distribution found by block coordinate descent.

    Restart 0 starts from the uniform distribution over paths (uniform exit rows
    on access graphs), restart 1 from uniform exit rows, later restarts from
    seeded random rows. ``sweep_trace`` of the winning restart starts with the
    initial value and has one entry per completed sweep.
    """
    obj = Objective.coerce(obj)
    opts = opts or OptimizeOptions()
    basis = identifiable_basis(graph, obj)
    best = None
    restart_values = []
    for restart in range(opts.restarts):
        rng = np.random.default_rng([opts.seed, restart])
        alpha0 = _initial_alpha(graph, restart, rng)
        alpha, value, trace, sweeps = _run(graph, obj, opts, basis, alpha0, rng)
        restart_values.append(value)
        if best is None or obj.better(value, best.value):
            best = OptimizeResult(alpha, value, trace, restart_values, sweeps, basis)
    best.restart_values = restart_values
    return best


def optimize_products_edges(graph, obj=ObjectiveKind.A_TRACE, opts=None):
    if not isinstance(graph, AccessGraph):
        raise TypeError("optimize_products_edges expects an AccessGraph")
    return optimize_products(graph, obj, opts)
