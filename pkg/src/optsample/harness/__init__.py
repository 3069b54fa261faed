"""Generators, file formats and comparison experiments."""

from .experiment import ExperimentReport, compare_experiment, round_to_counts
from .generators import InstanceSpec, gen_grid, gen_random_access_graph, gen_random_dag, gen_star
from .io import ParseError, parse_instance, parse_result, serialize_instance, serialize_result

__all__ = [
    "ExperimentReport",
    "InstanceSpec",
    "ParseError",
    "compare_experiment",
    "gen_grid",
    "gen_random_access_graph",
    "gen_random_dag",
    "gen_star",
    "parse_instance",
    "parse_result",
    "round_to_counts",
    "serialize_instance",
    "serialize_result",
]
