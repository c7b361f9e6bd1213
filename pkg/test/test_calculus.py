import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.calculus import (
    gamma,
    gamma2,
    gamma_bilinear,
    gamma_closed_form,
    laplacian,
    local_forms,
    lp_norm,
    parse_vertex_function,
    serialize_vertex_function,
)
from core.errors import DomainMismatchError, GraphFormatError, UnknownVertexError
from core.graph_core import reversible_measure
from core.models import Measure, VertexFunction
from support import random_graph, random_reversible_graph, single_vertex, star

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def _random_case(seed: int, symmetric: bool = False):
    rng = np.random.default_rng(seed)
    graph = random_graph(rng, int(rng.integers(2, 7)), symmetric=symmetric)
    return graph, rng.normal(size=graph.size), rng.normal(size=graph.size)


def _close(a, b, rel=1e-12):
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return np.max(np.abs(a - b)) <= rel * scale


class TestLaplacian:
    def test_constant_is_annihilated(self, remark):
        assert np.allclose(laplacian(remark, np.full(3, 7.0)), 0.0)

    def test_two_vertex(self, k2):
        assert np.allclose(laplacian(k2, np.array([0.0, 1.0])), [1.0, -1.0])

    def test_remark(self, remark):
        result = laplacian(remark, VertexFunction(values={"1": 0.0, "2": 1.0, "3": 0.0}))
        assert isinstance(result, VertexFunction)
        assert result.values == pytest.approx({"1": 2.0, "2": -6.0, "3": 1.0})

    def test_domain_mismatch(self, remark):
        with pytest.raises(DomainMismatchError):
            laplacian(remark, VertexFunction(values={"1": 0.0, "2": 1.0}))
        with pytest.raises(DomainMismatchError):
            laplacian(remark, np.zeros(4))


class TestGamma:
    def test_base_case_is_product(self, remark):
        f, h = np.array([1.0, 2.0, 3.0]), np.array([-1.0, 0.5, 2.0])
        assert np.allclose(gamma_bilinear(remark, 0, f, h), f * h)

    def test_two_vertex_values(self, k2):
        f = np.array([0.0, 1.0])
        assert np.allclose(gamma(k2, f), [0.5, 0.5])
        assert np.allclose(gamma2(k2, f), [1.0, 1.0])

    @given(seeds)
    @settings(max_examples=200, deadline=None)
    def test_product_rule(self, seed):
        graph, f, h = _random_case(seed)
        lhs = 2.0 * gamma_bilinear(graph, 1, f, h)
        rhs = laplacian(graph, f * h) - f * laplacian(graph, h) - h * laplacian(graph, f)
        assert _close(lhs, rhs)

    @given(seeds)
    @settings(max_examples=200, deadline=None)
    def test_closed_form_matches_recursion(self, seed):
        graph, f, h = _random_case(seed)
        assert np.all(gamma(graph, f) >= -1e-12)
        assert _close(gamma(graph, f), gamma_closed_form(graph, f), rel=1e-11)
        assert _close(gamma_bilinear(graph, 1, f, h), gamma_closed_form(graph, f, h), rel=1e-11)

    @given(seeds, st.floats(min_value=-50, max_value=50, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_translation_invariance(self, seed, c):
        graph, f, _ = _random_case(seed)
        assert _close(laplacian(graph, f + c), laplacian(graph, f), rel=1e-10)
        assert _close(gamma(graph, f + c), gamma(graph, f), rel=1e-9)
        assert _close(gamma2(graph, f + c), gamma2(graph, f), rel=1e-8)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_bilinear_and_symmetric(self, k, rng):
        graph = random_graph(rng, 5)
        f, g, h = rng.normal(size=(3, graph.size))
        a, b = 1.7, -0.3
        combined = gamma_bilinear(graph, k, a * f + b * g, h)
        separate = a * gamma_bilinear(graph, k, f, h) + b * gamma_bilinear(graph, k, g, h)
        assert _close(combined, separate, rel=1e-11)
        assert _close(gamma_bilinear(graph, k, f, h), gamma_bilinear(graph, k, h, f), rel=1e-11)

    def test_locality_of_gamma2(self, rng):
        graph = random_graph(rng, 9, density=0.15)
        f = rng.normal(size=graph.size)
        for x in graph.vertices:
            row = graph.distances[graph.index[x]]
            perturbed = f + np.where(row > 2, rng.normal(size=graph.size), 0.0)
            i = graph.index[x]
            assert gamma2(graph, perturbed)[i] == pytest.approx(gamma2(graph, f)[i], rel=1e-10, abs=1e-10)

    def test_summation_by_parts(self, rng):
        for _ in range(20):
            graph = random_reversible_graph(rng, int(rng.integers(2, 7)))
            m = reversible_measure(graph).as_array(graph)
            f, h = rng.normal(size=(2, graph.size))
            assert abs(np.dot(laplacian(graph, f), m)) <= 1e-10 * np.dot(np.abs(f), m) * 10
            lhs = np.dot(gamma_bilinear(graph, 1, f, h), m)
            rhs = -np.dot(f * laplacian(graph, h), m)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

    def test_negative_order_rejected(self, k2):
        with pytest.raises(ValueError):
            gamma_bilinear(k2, -1, np.zeros(2), np.zeros(2))


class TestLocalForms:
    def test_two_vertex(self, k2):
        forms = local_forms(k2, "a")
        assert forms.coordinates == ("b",)
        assert np.allclose(forms.A, [[1.0]])
        assert np.allclose(forms.B, [[0.5]])
        assert np.allclose(forms.c, [1.0])

    def test_isolated_vertex(self):
        forms = local_forms(single_vertex(), "a")
        assert forms.coordinates == ()
        assert forms.A.shape == (0, 0)
        assert forms.c.shape == (0,)

    def test_star_center(self):
        forms = local_forms(star(3), "c")
        assert np.allclose(forms.B, 0.5 * np.eye(3))

    def test_unknown_vertex(self, k2):
        with pytest.raises(UnknownVertexError):
            local_forms(k2, "z")

    @given(seeds)
    @settings(max_examples=100, deadline=None)
    def test_forms_reproduce_operators(self, seed):
        rng = np.random.default_rng(seed)
        graph = random_graph(rng, int(rng.integers(2, 8)), density=0.3)
        for x in graph.vertices:
            forms = local_forms(graph, x)
            i = graph.index[x]
            assert np.allclose(forms.A, forms.A.T)
            assert np.min(np.linalg.eigvalsh(forms.B)) >= -1e-12
            v = rng.normal(size=len(forms.coordinates))
            f = forms.lift(graph, v)
            scale = max(1.0, float(np.abs(forms.A).max()) * float(v @ v))
            assert v @ forms.A @ v == pytest.approx(gamma2(graph, f)[i], abs=1e-10 * scale)
            assert v @ forms.B @ v == pytest.approx(gamma(graph, f)[i], abs=1e-10 * scale)
            assert forms.c @ v == pytest.approx(laplacian(graph, f)[i], abs=1e-10 * scale)

    def test_gamma_form_vanishes_beyond_one_ball(self, rng):
        graph = random_graph(rng, 8, density=0.2)
        for x in graph.vertices:
            forms = local_forms(graph, x)
            for j, y in enumerate(forms.coordinates):
                if graph.distances[graph.index[x], graph.index[y]] == 2:
                    assert np.allclose(forms.B[j], 0.0)
                    assert np.allclose(forms.B[:, j], 0.0)


class TestNorms:
    def test_sup_norm(self):
        f = VertexFunction(values={"a": -3.0, "b": 2.0})
        assert lp_norm(f) == 3.0

    def test_weighted_l1(self, geps1):
        measure = reversible_measure(geps1)
        f = VertexFunction(values={"1": 1.0, "2": -1.0, "3": 2.0})
        assert lp_norm(f, 1, measure) == pytest.approx(16.0 + 4.0 + 2.0)
        assert lp_norm(f, 2, measure, graph=geps1) == pytest.approx(math.sqrt(16.0 + 4.0 + 4.0))

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            lp_norm(np.ones(2), 0.5)

    def test_measure_domain(self):
        f = VertexFunction(values={"a": 1.0})
        with pytest.raises(DomainMismatchError):
            lp_norm(f, 1, Measure(values={"b": 1.0}))


class TestVertexFunctionFormat:
    def test_parse_and_serialize(self, remark):
        f = parse_vertex_function('{"3": 1, "1": -0.5, "2": 2.25}', remark)
        text = serialize_vertex_function(f, remark)
        assert list(json.loads(text)) == ["1", "2", "3"]
        assert parse_vertex_function(text, remark) == f

    def test_domain_mismatch(self, remark):
        with pytest.raises(DomainMismatchError):
            parse_vertex_function('{"1": 0}', remark)

    @pytest.mark.parametrize("text", ['{"1": "x"}', "[1, 2]", '{"1": 1', '{"1": true}', '{"1": 1' + '0' * 400 + '}'])
    def test_malformed(self, text):
        with pytest.raises(GraphFormatError):
            parse_vertex_function(text)

    def test_non_finite_rejected(self, k2):
        with pytest.raises(ValueError):
            VertexFunction(values={"a": math.nan, "b": 0.0})
        with pytest.raises(DomainMismatchError):
            VertexFunction.from_array(k2, np.zeros(3))
