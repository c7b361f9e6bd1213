import json
import math
from typing import Dict, FrozenSet, Iterable, List, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components as _components

from core.errors import DisconnectedGraphError, GraphFormatError, NoEdgesError, UnknownVertexError
from core.models import Graph, GraphConstants, Measure, NotReversible
from utils.config import settings
from utils.logger import get_logger

logger = get_logger("graph_core")


def parse_graph(text: str) -> Graph:
    """Parse the JSON graph format: {"vertices": [...], "edges": [{"from", "to", "rate"}, ...]}."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise GraphFormatError(f"syntax error: {e.msg}", line=e.lineno, column=e.colno) from None

    if not isinstance(payload, dict):
        raise GraphFormatError("graph file must contain a JSON object")
    vertices = payload.get("vertices")
    if not isinstance(vertices, list) or not vertices:
        raise GraphFormatError("'vertices' must be a non-empty array")
    if not all(isinstance(v, str) for v in vertices):
        raise GraphFormatError("vertex identifiers must be strings")

    edges = payload.get("edges", [])
    if not isinstance(edges, list):
        raise GraphFormatError("'edges' must be an array")

    known = set(vertices)
    rates: Dict[tuple, float] = {}
    for position, edge in enumerate(edges):
        if not isinstance(edge, dict) or not {"from", "to", "rate"} <= set(edge):
            raise GraphFormatError(f"edge #{position} must have 'from', 'to' and 'rate'")
        x, y, rate = edge["from"], edge["to"], edge["rate"]
        if not isinstance(x, str) or not isinstance(y, str):
            raise GraphFormatError(f"edge #{position} endpoints must be vertex identifier strings")
        if x not in known:
            raise UnknownVertexError(x)
        if y not in known:
            raise UnknownVertexError(y)
        if x == y:
            raise GraphFormatError(f"self-loop at {x!r}")
        if isinstance(rate, bool) or not isinstance(rate, (int, float)):
            raise GraphFormatError(f"rate of edge {x!r}->{y!r} is not a number")
        try:
            rate = float(rate)
        except OverflowError:
            raise GraphFormatError(f"rate of edge {x!r}->{y!r} is out of range") from None
        if not math.isfinite(rate) or rate <= 0:
            raise GraphFormatError(f"nonpositive or non-finite rate on edge {x!r}->{y!r}: {rate}")
        if (x, y) in rates:
            raise GraphFormatError(f"duplicate edge {x!r}->{y!r}")
        rates[(x, y)] = rate

    graph = Graph(vertices=tuple(vertices), rates=rates)
    logger.debug("Parsed graph", vertices=graph.size, rates=len(rates))
    return graph


def serialize_graph(graph: Graph) -> str:
    """Vertices in declared order, edges sorted by (from, to); floats in shortest round-trip form."""
    edges = [
        {"from": x, "to": y, "rate": graph.rates[(x, y)]}
        for x, y in sorted(graph.rates)
    ]
    return json.dumps({"vertices": list(graph.vertices), "edges": edges}, indent=2) + "\n"


def constants(graph: Graph) -> GraphConstants:
    if not graph.rates:
        raise NoEdgesError()
    return GraphConstants(
        q_min=min(graph.rates.values()),
        max_degree=float(graph.out_degrees.max()),
    )


def distance(graph: Graph, x: str, y: str) -> Union[int, float]:
    d = graph.distances[graph.position(x), graph.position(y)]
    return math.inf if math.isinf(d) else int(d)


def ball(graph: Graph, x: str, r: int) -> FrozenSet[str]:
    if r < 0:
        raise ValueError("radius must be nonnegative")
    row = graph.distances[graph.position(x)]
    return frozenset(graph.vertices[j] for j in np.flatnonzero(row <= r))


def eccentricity(graph: Graph, x: str) -> int:
    row = graph.distances[graph.position(x)]
    return int(row[np.isfinite(row)].max())


def diameter(graph: Graph) -> Union[int, float]:
    d = graph.distances
    return math.inf if np.isinf(d).any() else int(d.max())


def connected_components(graph: Graph) -> List[List[str]]:
    count, labels = _components(csr_matrix(graph.adjacency.astype(float)), directed=False)
    groups: Dict[int, List[str]] = {}
    for v, label in zip(graph.vertices, labels):
        groups.setdefault(int(label), []).append(v)
    # first-vertex order
    return sorted(groups.values(), key=lambda members: graph.index[members[0]])


def is_connected(graph: Graph) -> bool:
    return len(connected_components(graph)) == 1


def is_bidirectional(graph: Graph) -> bool:
    """True iff q(x,y) > 0 exactly when q(y,x) > 0."""
    Q = graph.rate_matrix
    return bool(np.array_equal(Q > 0, Q.T > 0))


def _tree_path_to_root(node: int, predecessors: np.ndarray) -> List[int]:
    path = [node]
    while predecessors[path[-1]] >= 0:
        path.append(int(predecessors[path[-1]]))
    return path


def _cycle_witness(graph: Graph, x: int, y: int, predecessors: np.ndarray) -> List[str]:
    """Cycle formed by the non-tree edge x-y and the tree paths to their lowest common ancestor."""
    path_x = _tree_path_to_root(x, predecessors)
    path_y = _tree_path_to_root(y, predecessors)
    on_y = set(path_y)
    lca = next(v for v in path_x if v in on_y)
    up = path_x[: path_x.index(lca) + 1]
    down = list(reversed(path_y[: path_y.index(lca)]))
    cycle = up + down
    start = cycle.index(min(cycle))
    cycle = cycle[start:] + cycle[:start]
    return [graph.vertices[i] for i in cycle]


def reversible_measure(graph: Graph) -> Union[Measure, NotReversible]:
    """Detailed-balance measure normalized to minimum 1, or a NotReversible witness.

    Propagates m along a breadth-first spanning tree, then verifies every edge
    (Kolmogorov cycle criterion on the non-tree edges).
    """
    adjacency = csr_matrix(graph.adjacency.astype(float))
    count, _ = _components(adjacency, directed=False)
    if count > 1:
        raise DisconnectedGraphError()

    Q = graph.rate_matrix
    one_way = np.argwhere((Q > 0) != (Q.T > 0))
    if len(one_way):
        i, j = one_way[0]
        if Q[i, j] == 0:
            i, j = j, i
        logger.debug("One-directional edge", source=graph.vertices[i], target=graph.vertices[j])
        return NotReversible(reason="one-directional edge", witness=[graph.vertices[i], graph.vertices[j]])

    order, predecessors = breadth_first_order(adjacency, 0, directed=False, return_predecessors=True)
    m = np.ones(graph.size)
    for v in order[1:]:
        p = predecessors[v]
        m[v] = m[p] * Q[p, v] / Q[v, p]

    rtol = settings.reversibility_rtol
    src, dst, _ = graph.edge_arrays
    for x, y in zip(src, dst):
        if x > y:
            continue
        lhs = Q[x, y] * m[x]
        rhs = Q[y, x] * m[y]
        if abs(lhs - rhs) > rtol * max(abs(lhs), abs(rhs)):
            witness = _cycle_witness(graph, int(x), int(y), predecessors)
            logger.debug("Detailed balance fails", cycle=witness)
            return NotReversible(reason="cycle condition", witness=witness)

    m = m / m.min()
    return Measure(values={v: float(m[i]) for i, v in enumerate(graph.vertices)})


def measure_volume(measure: Measure, vertices: Iterable[str]) -> float:
    members = set(vertices)
    if not members:
        raise ValueError("volume of an empty set")
    unknown = members - set(measure.values)
    if unknown:
        raise UnknownVertexError(sorted(unknown)[0])
    return float(sum(mx for x, mx in measure.values.items() if x in members))
