import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optsample import (
    AccessExitDistribution,
    EnumerationCapError,
    ExitDistribution,
    FunctionalSet,
    check_identifiability,
    enumerate_bk,
    enumerate_paths,
)
from optsample.harness import (
    InstanceSpec,
    ParseError,
    compare_experiment,
    gen_grid,
    gen_random_access_graph,
    gen_random_dag,
    gen_star,
    parse_instance,
    parse_result,
    round_to_counts,
    serialize_instance,
    serialize_result,
)
from optsample.harness.io import alpha_from_json, alpha_to_json

from .conftest import FIVE_PATH_EDGES

FIVE_PATH_TEXT = """dag 3
edge s 1
edge s 2   # two exits at the source
edge 1 2
edge 1 3
edge 2 3
edge 2 d
edge 3 d
"""


# ---------------------------------------------------------------------------
# generators


def test_grid_shape():
    g = gen_grid(2)
    assert g.n_inner == 4 and g.path_count() == 2
    assert gen_grid(3).path_count() == 6
    with pytest.raises(ValueError):
        gen_grid(1)


@pytest.mark.parametrize("a", [2, 3, 4, 5])
def test_grid_unidentifiable_with_layer_shifts(a):
    fs = enumerate_paths(gen_grid(a)).functional_set
    rep = check_identifiability(fs)
    # every path meets each anti-diagonal r + c exactly once: 2a - 1 layers, 2a - 2 shifts
    assert rep.rank == np.linalg.matrix_rank(fs.matrix) == a * a - (2 * a - 2)
    layer = np.add.outer(np.arange(a), np.arange(a)).ravel()
    shifts = np.array([(layer == k).astype(float) - (layer == k + 1) for k in range(2 * a - 2)])
    np.testing.assert_allclose(fs.matrix @ shifts.T, 0.0, atol=1e-12)
    # the shifts span the null space reported by the SVD
    assert np.linalg.matrix_rank(np.vstack([shifts, rep.null_basis]), tol=1e-9) == 2 * a - 2


def test_random_dag_deterministic_and_identifiable():
    a, b = gen_random_dag(6, 0.5, 7), gen_random_dag(6, 0.5, 7)
    assert a == b
    assert check_identifiability(enumerate_paths(a).functional_set).rank == 6
    np.testing.assert_array_equal(enumerate_paths(a).functional_set.matrix, enumerate_paths(b).functional_set.matrix)


def test_random_dag_edge_cases():
    one = gen_random_dag(1, 0.3, 0)
    assert one.edges == [("s", 1), (1, "d")]
    with pytest.raises(RuntimeError):
        gen_random_dag(3, 0.0, 0, max_retries=5)
    with pytest.raises(ValueError):
        gen_random_dag(3, 1.5, 0)


def test_star():
    g = gen_star(3)
    fs = enumerate_paths(g).functional_set
    assert {tuple(r) for r in fs.matrix} == {tuple(r) for r in enumerate_bk(3, 2).matrix}
    with pytest.raises(ValueError):
        gen_star(2)


def test_random_access_graph_deterministic():
    assert gen_random_access_graph(5, 0.5, 3) == gen_random_access_graph(5, 0.5, 3)


def test_instance_spec():
    assert str(InstanceSpec.parse("random-dag:5")) == "random-dag:5:0.5:0"
    assert InstanceSpec.parse("grid:3").build() == gen_grid(3)
    for bad in ("grid", "grid:x", "cube:3", "grid:3:4"):
        with pytest.raises(ValueError):
            InstanceSpec.parse(bad)


# ---------------------------------------------------------------------------
# formats


def test_parse_five_path_dag():
    dag = parse_instance(FIVE_PATH_TEXT)
    assert dag.n_inner == 3 and len(dag.edges) == 7
    assert set(dag.edges) == set(FIVE_PATH_EDGES)


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("dag 2\n", 1, 1),
        ("dag 2\nedge s 1\nedge 1 x\n", 3, 8),
        ("dag 2\nedge s 1\nedge 1 5\n", 3, 8),
        ("dag 2\nnode 1\n", 2, 1),
        ("tree 3\n", 1, 1),
        ("", 1, 1),
        ("graph 2 1\nedge 0 1 k=1\naccess 0\naccess 1\n", 2, 10),
        ("functionals 2\nx 1 0\nx 1\n", 3, 1),
    ],
)
def test_parse_errors_have_positions(text, line, col):
    with pytest.raises(ParseError) as err:
        parse_instance(text)
    assert (err.value.line, err.value.col) == (line, col)


def test_empty_edge_list_message():
    with pytest.raises(ParseError, match="no source-drain path"):
        parse_instance("dag 3\n")


def test_grid_round_trip():
    text = serialize_instance(gen_grid(3))
    assert serialize_instance(parse_instance(text)) == text


@pytest.mark.parametrize("make", [lambda: gen_star(4), lambda: gen_random_access_graph(5, 0.6, 1)])
def test_access_graph_round_trip(make):
    g = make()
    text = serialize_instance(g)
    assert parse_instance(text) == g
    assert serialize_instance(parse_instance(text)) == text


def test_functionals_round_trip():
    fs = FunctionalSet([[1, 0.5], [0, 1]], costs=[2.0, 1.0])
    text = serialize_instance(fs)
    back = parse_instance(text)
    np.testing.assert_array_equal(back.matrix, fs.matrix)
    np.testing.assert_array_equal(back.costs, fs.costs)
    assert serialize_instance(back) == text


def test_graph_header_counts_variables():
    with pytest.raises(ParseError):
        parse_instance("graph 2 2\nedge 0 1 var=1\naccess 0\naccess 1\n")


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_alpha_json_round_trip(seed):
    dag = gen_random_dag(5, 0.5, seed)
    alpha = ExitDistribution.random(dag, seed)
    back = alpha_from_json(dag, json.loads(json.dumps(alpha_to_json(alpha))))
    np.testing.assert_array_equal(back.matrix, alpha.matrix)
    g = gen_star(4)
    ealpha = AccessExitDistribution.random(g, seed)
    eback = alpha_from_json(g, json.loads(json.dumps(alpha_to_json(ealpha))))
    np.testing.assert_allclose(eback.trans, ealpha.trans, atol=0)
    np.testing.assert_allclose(eback.start_dist, ealpha.start_dist, atol=0)


def test_result_round_trip():
    fs = enumerate_bk(3, 1)
    text = serialize_result({"weights": fs.uniform(), "value": 9.0, "certificate_gap": 0.0}, objective="a-trace", fset=fs)
    doc = parse_result(text)
    assert doc["type"] == "explicit" and doc["value"] == 9.0
    np.testing.assert_array_equal(doc["fset"].matrix, fs.matrix)
    dag = gen_grid(2)
    alpha = ExitDistribution.uniform(dag)
    text = serialize_result({"alpha": alpha, "value": 1.0}, objective="a-pseudo-trace", instance=dag)
    doc = parse_result(text)
    assert doc["type"] == "product" and doc["certificate_gap"] is None
    np.testing.assert_array_equal(doc["alpha"].matrix, alpha.matrix)
    with pytest.raises(ValueError):
        parse_result('{"type": "other"}')


# ---------------------------------------------------------------------------
# experiments and rounding


def test_round_to_counts_examples():
    assert round_to_counts([0.5, 0.5], 3).tolist() == [2, 1]
    assert round_to_counts([1.0], 7).tolist() == [7]
    assert round_to_counts(np.full(10, 0.1), 25).tolist() == [3] * 5 + [2] * 5
    with pytest.raises(ValueError):
        round_to_counts([1.0], 0)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10_000), total=st.integers(1, 500), k=st.integers(1, 12))
def test_round_to_counts_exact(seed, total, k):
    p = np.random.default_rng(seed).dirichlet(np.ones(k))
    counts = round_to_counts(p, total)
    assert counts.sum() == total
    assert np.all(np.abs(counts - total * p) < 1)


def test_compare_sandwich_random_dag():
    report = compare_experiment("random-dag:5:0.5:2", methods=["uniform", "product", "exact"])
    exact, product, uniform = (report.value(m) for m in ("exact", "product", "uniform"))
    assert 1 - 1e-9 <= product / exact <= uniform / exact + 1e-12
    ratios = {r["method"]: r["ratio_to_best"] for r in report.rows}
    assert ratios["exact"] == 1.0 and min(ratios.values()) == 1.0


def test_compare_grid_defaults_to_pseudo_trace():
    report = compare_experiment(InstanceSpec.parse("grid:3"), methods=["uniform", "product"])
    assert {r["objective"] for r in report.rows} == {"a-pseudo-trace"}
    assert report.value("product") < report.value("uniform")


def test_compare_star_closed_form():
    report = compare_experiment("star:4", methods=["product", "closed_form"])
    assert report.value("product") == pytest.approx(report.value("closed_form"), rel=1e-3)


def test_compare_csv_header_and_order():
    report = compare_experiment("random-dag:4:0.5:1", methods=["uniform", "product"])
    rows = list(csv.reader(io.StringIO(report.to_csv())))
    assert rows[0] == ["instance", "method", "objective", "value", "ratio_to_best", "wall_time_ms"]
    assert [r[1] for r in rows[1:]] == ["uniform", "product"]


def test_compare_exact_over_cap():
    with pytest.raises(EnumerationCapError):
        compare_experiment("grid:6", methods=["exact"], cap=100)


def test_compare_rejects_unknown_method():
    with pytest.raises(ValueError):
        compare_experiment("grid:2", methods=["magic"])


def test_compare_with_simulation():
    report = compare_experiment("star:4", methods=["uniform"], simulate={"samples": 200, "trials": 1000, "seed": 3})
    row = report.rows[0]
    assert abs(row["mc_mse_trace"] - row["mc_predicted"]) <= 0.1 * row["mc_predicted"]
    assert "mc_mse_trace" in report.to_csv().splitlines()[0]


def test_plot_writes_svg(tmp_path):
    pytest.importorskip("matplotlib")
    report = compare_experiment("grid:2", methods=["uniform", "product"])
    report.extend(compare_experiment("grid:3", methods=["uniform", "product"]))
    out = tmp_path / "fig.svg"
    report.plot(out)
    assert out.read_text().lstrip().startswith("<?xml")
