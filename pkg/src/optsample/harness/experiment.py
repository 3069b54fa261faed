"""Method comparison runs (uniform vs product vs exact vs closed form) and sampling plans."""

import csv
import io
import time
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .._validation import check_distribution, check_positive_int
from ..closed_form import bk_optimal
from ..dag_dp import AccessExitDistribution, AccessGraph, PATH_CAP, SourceDrainDag, enumerate_paths
from ..exact_solver import SolverOptions, solve_simplex
from ..exceptions import EnumerationCapError
from ..model import (
    FunctionalSet,
    GenerativeModel,
    Objective,
    ObjectiveKind,
    check_identifiability,
    design_matrix,
    objective_value,
    simulate_estimation,
)
from ..product_optimizer import (
    OptimizeOptions,
    evaluate_alpha,
    identifiable_basis,
    optimize_products,
    uniform_path_alpha,
)
from .generators import InstanceSpec

METHODS = ("uniform", "product", "exact", "closed_form")
CSV_FIELDS = ["instance", "method", "objective", "value", "ratio_to_best", "wall_time_ms"]


def round_to_counts(dist, total):
    """Largest-remainder apportionment of ``total`` draws; ties go to the lowest index."""
    p = check_distribution(dist, np.size(dist), atol=1e-9)
    total = check_positive_int(total, "total")
    quota = p * total
    counts = np.floor(quota).astype(int)
    remainder = quota - counts
    short = total - counts.sum()
    order = np.lexsort((np.arange(p.size), -remainder))
    counts[order[:short]] += 1
    return counts


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)

    def to_csv(self):
        buf = io.StringIO()
        extra = [k for k in ("mc_mse_trace", "mc_predicted") if any(k in r for r in self.rows)]
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS + extra, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({**row, "value": repr(row["value"]), "ratio_to_best": repr(row["ratio_to_best"])})
        return buf.getvalue()

    def extend(self, other):
        self.rows.extend(other.rows)
        return self

    def value(self, method, instance=None):
        for row in self.rows:
            if row["method"] == method and (instance is None or row["instance"] == instance):
                return row["value"]
        raise KeyError(method)

    def plot(self, path):
        """Value against instance size per method, saved as a vector graphic."""
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.5))
        for method in dict.fromkeys(r["method"] for r in self.rows):
            pts = sorted((r["size"], r["value"]) for r in self.rows if r["method"] == method)
            ax.plot(*zip(*pts), marker="o", label=method)
        ax.set_xlabel("number of variables")
        ax.set_ylabel(self.rows[0]["objective"] if self.rows else "value")
        ax.set_yscale("log")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def _instance_size(instance):
    if isinstance(instance, SourceDrainDag):
        return instance.n_inner
    if isinstance(instance, AccessGraph):
        return instance.n_vars
    return instance.dimension


def default_objective(instance):
    """A-trace when the instance is identifiable, the pseudo-trace otherwise."""
    if isinstance(instance, FunctionalSet):
        identifiable = check_identifiability(instance).identifiable
    else:
        identifiable = identifiable_basis(instance, ObjectiveKind.A_PSEUDO_TRACE) is None
    return Objective(ObjectiveKind.A_TRACE if identifiable else ObjectiveKind.A_PSEUDO_TRACE)


def _explicit_bk(fset):
    X = fset.matrix
    if not np.all((X == 0) | (X == 1)):
        return None
    ones = X.sum(axis=1)
    k = int(ones[0])
    if np.all(ones == k) and len(fset) == comb(fset.dimension, k):
        return fset.dimension, k
    return None


def _closed_form(instance, obj):
    if obj.kind is not ObjectiveKind.A_TRACE:
        raise ValueError("closed forms exist only for the a-trace criterion")
    if isinstance(instance, AccessGraph):
        star = _star_leaves(instance)
        if star is None:
            raise ValueError("closed form is available only for star access graphs")
        fset = enumerate_paths(instance).functional_set
        return bk_optimal(star, 2).optimal_value, {"weights": fset.uniform(), "fset": fset}
    if isinstance(instance, FunctionalSet) and (nk := _explicit_bk(instance)):
        return bk_optimal(*nk).optimal_value, {"weights": instance.uniform(), "fset": instance}
    raise ValueError("closed form is available only for K-choose-N sets and stars")


def _star_leaves(graph):
    from .generators import gen_star

    leaves = graph.n_nodes - 1
    if leaves >= 3:
        try:
            if graph == gen_star(leaves):
                return leaves
        except ValueError:
            return None
    return None


def _enumerate(instance, cap):
    if isinstance(instance, FunctionalSet):
        return instance
    return enumerate_paths(instance, cap=cap).functional_set


def run_method(instance, method, obj, opts=None, cap=PATH_CAP):
    """Value of one method on one instance; returns ``(value, payload)``.

    ``payload`` is the distribution the value was computed for: an exit
    distribution for graph methods, a weight vector for explicit ones.
    """
    obj = Objective.coerce(obj)
    opts = opts or {}
    if method == "closed_form":
        return _closed_form(instance, obj)
    if method == "exact":
        fset = _enumerate(instance, cap)
        res = solve_simplex(fset, None, obj, opts.get("solver"))
        return res.value, {"weights": res.distribution, "fset": fset, "certificate_gap": res.certificate_gap}
    if isinstance(instance, FunctionalSet):
        if method == "uniform":
            p = instance.uniform()
            basis = None
            report = check_identifiability(instance)
            if obj.uses_f_matrix and not report.identifiable:
                basis = np.linalg.svd(instance.matrix, full_matrices=False)[2][: report.rank].T
            return objective_value(design_matrix(instance, p, None, obj), obj, basis), {"weights": p}
        raise ValueError(f"method {method!r} needs a graph instance")
    if method == "uniform":
        basis = identifiable_basis(instance, obj)
        if isinstance(instance, SourceDrainDag):
            alpha = uniform_path_alpha(instance)
        else:
            alpha = AccessExitDistribution.uniform(instance)
        return evaluate_alpha(instance, alpha, obj, basis), {"alpha": alpha}
    if method == "product":
        res = optimize_products(instance, obj, opts.get("product"))
        return res.value, {"alpha": res.alpha, "sweep_trace": res.sweep_trace}
    raise ValueError(f"unknown method {method!r}")


def compare_experiment(spec, obj=None, methods=("uniform", "product"), opts=None, cap=PATH_CAP, simulate=None):
    """Run ``methods`` on one instance and report values and ratios to the best.

    ``spec`` is an :class:`InstanceSpec` (or its string form) or an instance
    object. ``simulate`` is an optional dict ``{"samples", "trials", "seed"}``
    that adds a Monte-Carlo MSE check of every method's distribution.
    """
    if isinstance(spec, str):
        spec = InstanceSpec.parse(spec)
    if isinstance(spec, InstanceSpec):
        name, instance = str(spec), spec.build()
    else:
        name, instance = type(spec).__name__, spec
    obj = default_objective(instance) if obj is None else Objective.coerce(obj)
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown method(s) {unknown}")
    if "exact" in methods and not isinstance(instance, FunctionalSet):
        count = instance.path_count() if isinstance(instance, SourceDrainDag) else instance.walk_count()
        if count > cap:
            raise EnumerationCapError(f"exact method needs {count} paths, cap is {cap}")

    rows = []
    for method in methods:
        start = time.perf_counter()
        value, payload = run_method(instance, method, obj, opts, cap)
        elapsed = 1000.0 * (time.perf_counter() - start)
        row = {
            "instance": name,
            "method": method,
            "objective": obj.kind.value,
            "value": float(value),
            "wall_time_ms": round(elapsed, 3),
            "size": _instance_size(instance),
        }
        if simulate and payload is not None:
            row.update(_simulate_payload(instance, payload, simulate, cap))
        rows.append(row)

    values = np.array([r["value"] for r in rows])
    best = float(values.max() if obj.maximize else values.min())
    for row in rows:
        v = row["value"]
        if obj.maximize:
            row["ratio_to_best"] = 1.0 if v == best else (best / v if v > 0 else float("inf"))
        else:
            row["ratio_to_best"] = 1.0 if v == best else v / best
    return ExperimentReport(rows)


def _simulate_payload(instance, payload, params, cap):
    if "weights" in payload:
        fset = payload.get("fset", instance)
        p = payload["weights"]
    else:
        enum = enumerate_paths(instance, payload["alpha"], cap=cap)
        fset, p = enum.functional_set, enum.probabilities
    keep = p > 0
    fset = FunctionalSet(fset.matrix[keep])
    p = p[keep] / p[keep].sum()
    if not check_identifiability(fset).identifiable:
        return {}
    gm = GenerativeModel(np.zeros(fset.dimension))
    res = simulate_estimation(
        fset, p, gm, params.get("samples", 1000), params.get("trials", 200), params.get("seed", 0)
    )
    return {"mc_mse_trace": res.empirical_mse_trace, "mc_predicted": res.predicted}


def default_solver_options(tol=None, max_iters=None):
    kw = {}
    if tol is not None:
        kw["tolerance"] = tol
    if max_iters is not None:
        kw["max_iterations"] = max_iters
    return SolverOptions(**kw)


def default_product_options(sweeps=None, restarts=None, seed=None, tol=None):
    kw = {}
    if sweeps is not None:
        kw["max_sweeps"] = sweeps
    if restarts is not None:
        kw["restarts"] = restarts
    if seed is not None:
        kw["seed"] = seed
    if tol is not None:
        kw["inner"] = SolverOptions(tolerance=tol, max_iterations=2000)
    return OptimizeOptions(**kw)
