"""Graph builders and reference integrators shared by the test modules."""
import itertools
from typing import Dict, Tuple

import numpy as np

from cli.generators import cycle, g_eps, path, remark_graph
from core.models import Graph


def two_vertex(rate: float = 1.0) -> Graph:
    return Graph(vertices=("a", "b"), rates={("a", "b"): rate, ("b", "a"): rate})


def single_vertex() -> Graph:
    return Graph(vertices=("a",), rates={})


def star(leaves: int = 3, rate: float = 1.0) -> Graph:
    vertices = ("c",) + tuple(f"l{i}" for i in range(leaves))
    rates: Dict[Tuple[str, str], float] = {}
    for leaf in vertices[1:]:
        rates[("c", leaf)] = rate
        rates[(leaf, "c")] = rate
    return Graph(vertices=vertices, rates=rates)


def disjoint_pairs() -> Graph:
    return Graph(
        vertices=("a", "b", "c", "d"),
        rates={("a", "b"): 1.0, ("b", "a"): 1.0, ("c", "d"): 1.0, ("d", "c"): 1.0},
    )


def scaled(graph: Graph, factor: float) -> Graph:
    return Graph(vertices=graph.vertices, rates={e: factor * q for e, q in graph.rates.items()})


def random_graph(rng: np.random.Generator, size: int, density: float = 0.6, symmetric: bool = False) -> Graph:
    """Connected graph on 0..size-1: a random spanning path plus random extra edges, rates in [0.2, 3]."""
    vertices = tuple(str(i) for i in range(size))
    order = rng.permutation(size)
    rates: Dict[Tuple[str, str], float] = {}

    def add(i: int, j: int) -> None:
        x, y = vertices[i], vertices[j]
        rates[(x, y)] = float(rng.uniform(0.2, 3.0))
        rates[(y, x)] = rates[(x, y)] if symmetric else float(rng.uniform(0.2, 3.0))

    for i, j in zip(order, order[1:]):
        add(int(i), int(j))
    for i, j in itertools.combinations(range(size), 2):
        if (vertices[i], vertices[j]) not in rates and rng.random() < density:
            add(i, j)
    return Graph(vertices=vertices, rates=rates)


def random_reversible_graph(rng: np.random.Generator, size: int, density: float = 0.6) -> Graph:
    """Detailed balance by construction: q(x,y) = w(x,y) / m(x) with symmetric weights w."""
    base = random_graph(rng, size, density, symmetric=True)
    m = rng.uniform(0.5, 2.0, size)
    rates = {(x, y): w / m[base.index[x]] for (x, y), w in base.rates.items()}
    return Graph(vertices=base.vertices, rates=rates)


def rk4_two_vertex(u0: Tuple[float, float], t: float, step: float) -> Tuple[float, float]:
    """Classical fixed-step Runge-Kutta for du/dt = Delta u + Gamma u on the unit two-vertex graph."""

    def rhs(a: float, b: float) -> Tuple[float, float]:
        d = b - a
        return d + 0.5 * d * d, -d + 0.5 * d * d

    steps = int(round(t / step))
    h = t / steps
    a, b = u0
    for _ in range(steps):
        k1 = rhs(a, b)
        k2 = rhs(a + 0.5 * h * k1[0], b + 0.5 * h * k1[1])
        k3 = rhs(a + 0.5 * h * k2[0], b + 0.5 * h * k2[1])
        k4 = rhs(a + h * k3[0], b + h * k3[1])
        a += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        b += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return a, b


__all__ = [
    "cycle",
    "disjoint_pairs",
    "g_eps",
    "path",
    "random_graph",
    "random_reversible_graph",
    "remark_graph",
    "rk4_two_vertex",
    "scaled",
    "single_vertex",
    "star",
    "two_vertex",
]
