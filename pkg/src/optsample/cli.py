"""Command line entry point: ``optsample {gen,solve,compare,simulate,roundplan}``.

Exit status is 0 on success, 2 on malformed input or options, 3 when the
instance is unidentifiable or the budget is infeasible.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dag_dp import PATH_CAP, enumerate_paths
from .exceptions import InfeasibleError, UnidentifiableError
from .harness.experiment import (
    METHODS,
    compare_experiment,
    default_objective,
    default_product_options,
    default_solver_options,
    round_to_counts,
    run_method,
)
from .harness.generators import InstanceSpec
from .harness.io import parse_instance, parse_result, serialize_instance, serialize_result
from .model import FunctionalSet, GenerativeModel, Objective, ObjectiveKind, simulate_estimation

EXIT_OK, EXIT_INVALID, EXIT_UNIDENTIFIABLE = 0, 2, 3
OBJECTIVES = [k.value for k in ObjectiveKind]
CLI_METHODS = [m.replace("_", "-") for m in METHODS]


def load_instance(ref):
    """A generator spec such as ``grid:3`` or a path to an instance file."""
    kind = ref.partition(":")[0]
    if kind in InstanceSpec.KINDS and not Path(ref).exists():
        return str(InstanceSpec.parse(ref)), InstanceSpec.parse(ref).build()
    path = Path(ref)
    if not path.is_file():
        raise ValueError(f"{ref!r} is neither an instance spec nor a readable file")
    return path.name, parse_instance(path.read_text())


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _options(args):
    return {
        "solver": default_solver_options(args.tol, args.max_iters),
        "product": default_product_options(args.sweeps, args.restarts, args.seed, None),
    }


def _objective(args, instance):
    return default_objective(instance) if args.objective is None else Objective.coerce(args.objective)


def _method(name):
    return name.replace("-", "_")


def cmd_gen(args):
    instance = InstanceSpec.parse(args.spec).build()
    _emit(serialize_instance(instance), args.out)


def _solve(args, instance, method):
    obj = _objective(args, instance)
    value, payload = run_method(instance, method, obj, _options(args), args.cap)
    result = {"value": value, **payload}
    if "weights" in payload:
        fset = payload.get("fset", instance)
        return obj, result, {"fset": fset}
    return obj, result, {"instance": instance}


def cmd_solve(args):
    _, instance = load_instance(args.instance)
    obj, result, where = _solve(args, instance, _method(args.method))
    _emit(serialize_result(result, objective=obj.kind, **where), args.out)


def cmd_compare(args):
    methods = [_method(m) for m in (args.method or ["uniform", "product"])]
    report = None
    for ref in args.instances:
        kind = ref.partition(":")[0]
        spec = InstanceSpec.parse(ref) if kind in InstanceSpec.KINDS and not Path(ref).exists() else None
        if spec is None:
            spec = load_instance(ref)[1]
        obj = None if args.objective is None else Objective.coerce(args.objective)
        part = compare_experiment(spec, obj, methods, _options(args), args.cap)
        report = part if report is None else report.extend(part)
    _emit(report.to_csv(), args.out)
    if args.plot:
        report.plot(args.plot)


def _distribution(args):
    """``(FunctionalSet, weights)`` from a result file or from solving an instance."""
    if args.result:
        doc = parse_result(Path(args.result).read_text())
        if doc["type"] == "explicit":
            return doc["fset"], doc["weights"]
        enum = enumerate_paths(doc["instance"], doc["alpha"], cap=args.cap)
        return enum.functional_set, enum.probabilities
    _, instance = load_instance(args.instance)
    _, result, where = _solve(args, instance, _method(args.method))
    if "fset" in where:
        return where["fset"], result["weights"]
    enum = enumerate_paths(instance, result["alpha"], cap=args.cap)
    return enum.functional_set, enum.probabilities


def cmd_simulate(args):
    fset, p = _distribution(args)
    keep = p > 0
    fset, p = FunctionalSet(fset.matrix[keep]), p[keep] / p[keep].sum()
    res = simulate_estimation(fset, p, GenerativeModel(np.zeros(fset.dimension)), args.samples, args.trials, args.seed or 0)
    doc = {
        "samples": args.samples,
        "trials": args.trials,
        "empirical_mse_trace": res.empirical_mse_trace,
        "predicted_mse_trace": res.predicted,
        "relative_error": abs(res.empirical_mse_trace - res.predicted) / res.predicted,
        "retries": res.retries,
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)


def cmd_roundplan(args):
    fset, p = _distribution(args)
    counts = round_to_counts(p / p.sum(), args.total)
    lines = ["index,count,functional"]
    for i in np.flatnonzero(counts):
        lines.append(f"{i},{counts[i]}," + " ".join(format(v, "g") for v in fset.matrix[i]))
    _emit("\n".join(lines) + "\n", args.out)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--objective", choices=OBJECTIVES)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iters", type=int)
    common.add_argument("--sweeps", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--cap", type=int, default=PATH_CAP)
    common.add_argument("--out", help="write to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="optsample", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a generated instance file")
    p.add_argument("spec", help="grid:<a>, random-dag:<n>[:<p>[:<seed>]], star:<leaves>, random-access:<nodes>[:<p>[:<seed>]]")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", parents=[common], help="compute a sampling distribution")
    p.add_argument("instance", help="instance file or generator spec")
    p.add_argument("--method", choices=CLI_METHODS, default="exact")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", parents=[common], help="CSV comparison of methods")
    p.add_argument("instances", nargs="+")
    p.add_argument("--method", choices=CLI_METHODS, action="append", help="repeatable; default uniform and product")
    p.add_argument("--plot", help="also save a value-vs-size plot (needs matplotlib)")
    p.set_defaults(func=cmd_compare)

    for name, func, helptext in (
        ("simulate", cmd_simulate, "Monte-Carlo check of the predicted MSE trace"),
        ("roundplan", cmd_roundplan, "integer sampling plan from a distribution"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("instance", nargs="?", help="instance file or generator spec")
        src.add_argument("--result", help="result document written by solve")
        p.add_argument("--method", choices=CLI_METHODS, default="exact")
        p.set_defaults(func=func)
    sub.choices["simulate"].add_argument("--samples", type=int, default=1000)
    sub.choices["simulate"].add_argument("--trials", type=int, default=200)
    sub.choices["roundplan"].add_argument("--total", type=int, required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (UnidentifiableError, InfeasibleError) as exc:
        print(f"optsample: {exc}", file=sys.stderr)
        return EXIT_UNIDENTIFIABLE
    except (ValueError, TypeError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"optsample: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
