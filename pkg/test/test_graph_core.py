import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import DisconnectedGraphError, GraphFormatError, NoEdgesError, UnknownVertexError
from core.graph_core import (
    ball,
    connected_components,
    constants,
    diameter,
    distance,
    eccentricity,
    is_bidirectional,
    is_connected,
    measure_volume,
    parse_graph,
    reversible_measure,
    serialize_graph,
)
from core.models import Graph, Measure, NotReversible
from support import disjoint_pairs, g_eps, path, random_graph, scaled, single_vertex

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)

REMARK_TEXT = """{
  "vertices": ["1", "2", "3"],
  "edges": [
    {"from": "1", "to": "2", "rate": 2},
    {"from": "2", "to": "1", "rate": 1},
    {"from": "2", "to": "3", "rate": 5},
    {"from": "3", "to": "2", "rate": 1}
  ]
}"""


def _graph_text(vertices, edges):
    return json.dumps({"vertices": vertices, "edges": [{"from": x, "to": y, "rate": q} for x, y, q in edges]})


class TestParse:
    def test_remark_rates(self, remark):
        graph = parse_graph(REMARK_TEXT)
        assert graph == remark
        assert graph.rate("1", "2") == 2.0
        assert graph.rate("1", "3") == 0.0

    def test_serialize_roundtrip_is_byte_identical(self, remark):
        text = serialize_graph(remark)
        assert serialize_graph(parse_graph(text)) == text
        assert parse_graph(text) == remark

    def test_edges_sorted_in_output(self):
        graph = parse_graph(_graph_text(["b", "a"], [("b", "a", 1.5), ("a", "b", 0.25)]))
        payload = json.loads(serialize_graph(graph))
        assert payload["vertices"] == ["b", "a"]
        assert [(e["from"], e["to"]) for e in payload["edges"]] == [("a", "b"), ("b", "a")]
        assert payload["edges"][0]["rate"] == 0.25

    def test_syntax_error_reports_line(self):
        with pytest.raises(GraphFormatError) as info:
            parse_graph('{"vertices": ["a"],\n "edges": [}')
        assert info.value.line == 2
        assert "line 2" in str(info.value)

    @pytest.mark.parametrize(
        "vertices, edges, error",
        [
            (["a", "b"], [("a", "c", 1.0)], UnknownVertexError),
            (["a", "b"], [("a", "a", 1.0)], GraphFormatError),
            (["a", "b"], [("a", "b", 0.0)], GraphFormatError),
            (["a", "b"], [("a", "b", -1.0)], GraphFormatError),
            (["a", "a"], [], GraphFormatError),
            ([], [], GraphFormatError),
            (["a", "b"], [(["a"], "b", 1.0)], GraphFormatError),
            (["a", "b"], [("a", {"id": "b"}, 1.0)], GraphFormatError),
            (["a", "b"], [("a", "b", 10 ** 400)], GraphFormatError),
        ],
    )
    def test_invalid_graphs(self, vertices, edges, error):
        with pytest.raises(error):
            parse_graph(_graph_text(vertices, edges))

    def test_duplicate_edge(self):
        text = _graph_text(["a", "b"], [("a", "b", 1.0), ("a", "b", 2.0)])
        with pytest.raises(GraphFormatError, match="duplicate"):
            parse_graph(text)

    def test_non_numeric_rate(self):
        with pytest.raises(GraphFormatError):
            parse_graph('{"vertices": ["a", "b"], "edges": [{"from": "a", "to": "b", "rate": "fast"}]}')

    def test_missing_rate_field(self):
        with pytest.raises(GraphFormatError):
            parse_graph('{"vertices": ["a", "b"], "edges": [{"from": "a", "to": "b"}]}')


class TestConstants:
    def test_remark(self, remark):
        consts = constants(remark)
        assert consts.q_min == 1.0
        assert consts.max_degree == 6.0

    def test_no_edges(self):
        with pytest.raises(NoEdgesError, match="no edges"):
            constants(single_vertex())


class TestDistances:
    def test_path_distances(self):
        graph = path(5)
        assert distance(graph, "0", "4") == 4
        assert ball(graph, "2", 1) == frozenset({"1", "2", "3"})
        assert ball(graph, "2", 0) == frozenset({"2"})
        assert diameter(graph) == 4
        assert eccentricity(graph, "2") == 2

    def test_one_directional_edge_counts_for_distance(self):
        graph = Graph(vertices=("a", "b"), rates={("a", "b"): 1.0})
        assert distance(graph, "b", "a") == 1

    def test_disconnected(self):
        graph = disjoint_pairs()
        assert distance(graph, "a", "c") == math.inf
        assert diameter(graph) == math.inf
        assert not is_connected(graph)
        assert connected_components(graph) == [["a", "b"], ["c", "d"]]

    def test_unknown_vertex(self, remark):
        with pytest.raises(UnknownVertexError):
            distance(remark, "1", "9")

    def test_negative_radius(self, remark):
        with pytest.raises(ValueError):
            ball(remark, "1", -1)

    def test_neighbors_are_symmetrized(self, remark):
        assert remark.neighbors("2") == ["1", "3"]
        assert remark.neighbors("1") == ["2"]
        one_way = Graph(vertices=("a", "b", "c"), rates={("a", "b"): 1.0})
        assert one_way.neighbors("b") == ["a"]
        assert one_way.neighbors("c") == []
        assert single_vertex().neighbors("a") == []

    @given(seeds)
    @settings(max_examples=200, deadline=None)
    def test_metric_axioms_and_balls(self, seed):
        rng = np.random.default_rng(seed)
        size = int(rng.integers(1, 13))
        if rng.random() < 0.5:
            graph = random_graph(rng, size, density=float(rng.uniform(0.0, 0.5)))
        else:
            vertices = tuple(str(i) for i in range(size))
            rates = {
                (x, y): float(rng.uniform(0.2, 3.0))
                for x, y in itertools.permutations(vertices, 2)
                if rng.random() < 0.15
            }
            graph = Graph(vertices=vertices, rates=rates)

        for x in graph.vertices:
            assert distance(graph, x, x) == 0
            assert ball(graph, x, 0) == frozenset({x})
            assert set(graph.neighbors(x)) == ball(graph, x, 1) - {x}
            for r in range(size):
                assert ball(graph, x, r) <= ball(graph, x, r + 1)
            for y in graph.vertices:
                d = distance(graph, x, y)
                assert d == distance(graph, y, x)
                if x != y and math.isfinite(d):
                    assert d >= 1
                    assert y in ball(graph, x, d) and y not in ball(graph, x, d - 1)
                for z in graph.vertices:
                    assert distance(graph, x, z) <= d + distance(graph, y, z)


class TestReversibleMeasure:
    @pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
    def test_g_eps_ratios(self, eps):
        measure = reversible_measure(g_eps(eps))
        assert isinstance(measure, Measure)
        m = measure.values
        assert m["1"] / m["2"] == pytest.approx(4.0 / eps, rel=1e-12)
        assert m["2"] / m["3"] == pytest.approx(4.0, rel=1e-12)
        assert min(m.values()) == pytest.approx(1.0)

    def test_detailed_balance(self, remark):
        measure = reversible_measure(remark)
        for (x, y), q in remark.rates.items():
            assert q * measure.values[x] == pytest.approx(remark.rate(y, x) * measure.values[y], rel=1e-12)

    def test_one_directional_edge(self):
        graph = Graph(vertices=("a", "b", "c"), rates={("a", "b"): 1.0, ("b", "c"): 1.0, ("c", "b"): 2.0})
        report = reversible_measure(graph)
        assert isinstance(report, NotReversible)
        assert report.reason == "one-directional edge"
        assert report.witness == ["a", "b"]

    def test_cycle_condition(self):
        rates = {("0", "1"): 2.0, ("1", "2"): 1.0, ("2", "0"): 1.0, ("1", "0"): 1.0, ("2", "1"): 1.0, ("0", "2"): 1.0}
        report = reversible_measure(Graph(vertices=("0", "1", "2"), rates=rates))
        assert isinstance(report, NotReversible)
        assert report.reason == "cycle condition"
        assert set(report.witness) == {"0", "1", "2"}
        assert report.witness[0] == "0"

    def test_disconnected(self):
        with pytest.raises(DisconnectedGraphError, match="disconnected"):
            reversible_measure(disjoint_pairs())

    def test_volume(self, geps1):
        measure = reversible_measure(geps1)
        assert measure_volume(measure, ["2", "3"]) == pytest.approx(5.0)
        with pytest.raises(UnknownVertexError):
            measure_volume(measure, ["9"])
        with pytest.raises(ValueError):
            measure_volume(measure, [])


def test_bidirectional(remark):
    assert is_bidirectional(remark)
    assert not is_bidirectional(Graph(vertices=("a", "b"), rates={("a", "b"): 1.0}))


def test_directed_triangle_violates_cycle_condition():
    forward = {("1", "2"): 2.0, ("2", "3"): 2.0, ("3", "1"): 2.0}
    backward = {(y, x): 1.0 for x, y in forward}
    report = reversible_measure(Graph(vertices=("1", "2", "3"), rates={**forward, **backward}))
    assert isinstance(report, NotReversible)
    assert report.reason == "cycle condition"
    assert sorted(report.witness) == ["1", "2", "3"]


def test_measure_invariant_under_rate_scaling(remark):
    base = reversible_measure(remark).values
    for x, mx in reversible_measure(scaled(remark, 3.5)).values.items():
        assert mx == pytest.approx(base[x], rel=1e-12)
