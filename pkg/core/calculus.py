import json
import math
from typing import Optional, Union

import numpy as np

from core.errors import DomainMismatchError, GraphFormatError
from core.models import Graph, LocalForms, Measure, VertexFunction
from utils.logger import get_logger

logger = get_logger("calculus")

FunctionLike = Union[VertexFunction, np.ndarray]


def vertex_values(graph: Graph, f: FunctionLike) -> np.ndarray:
    """Values in the graph's vertex order."""
    if isinstance(f, VertexFunction):
        return f.to_array(graph)
    arr = np.asarray(f, dtype=float)
    if arr.shape != (graph.size,):
        raise DomainMismatchError(f"expected {graph.size} values, got shape {arr.shape}")
    return arr


def match_type(graph: Graph, result: np.ndarray, *inputs: FunctionLike) -> FunctionLike:
    # VertexFunction in, VertexFunction out; arrays stay arrays
    if any(isinstance(f, VertexFunction) for f in inputs):
        return VertexFunction.from_array(graph, result)
    return result


def _apply_laplacian(graph: Graph, f: np.ndarray) -> np.ndarray:
    src, dst, q = graph.edge_arrays
    return np.bincount(src, weights=q * (f[dst] - f[src]), minlength=graph.size)


def laplacian(graph: Graph, f: FunctionLike) -> FunctionLike:
    """(Delta f)(x) = sum_y q(x,y) (f(y) - f(x))."""
    return match_type(graph, _apply_laplacian(graph, vertex_values(graph, f)), f)


def _gamma_recursion(graph: Graph, k: int, f: np.ndarray, h: np.ndarray) -> np.ndarray:
    if k == 0:
        return f * h
    previous = _gamma_recursion(graph, k - 1, f, h)
    return 0.5 * (
        _apply_laplacian(graph, previous)
        - _gamma_recursion(graph, k - 1, f, _apply_laplacian(graph, h))
        - _gamma_recursion(graph, k - 1, _apply_laplacian(graph, f), h)
    )


def gamma_bilinear(graph: Graph, k: int, f: FunctionLike, h: FunctionLike) -> FunctionLike:
    """Gamma_k(f, h) from Gamma_0(f,h) = fh and 2 Gamma_{k+1}(f,h) = Delta Gamma_k(f,h) - Gamma_k(f, Delta h) - Gamma_k(Delta f, h).

    Evaluated literally; the cost grows as 3^k, which is fine for the k <= 2 used here.
    """
    if k < 0:
        raise ValueError("k must be a natural number")
    result = _gamma_recursion(graph, k, vertex_values(graph, f), vertex_values(graph, h))
    return match_type(graph, result, f, h)


def gamma(graph: Graph, f: FunctionLike) -> FunctionLike:
    return gamma_bilinear(graph, 1, f, f)


def gamma2(graph: Graph, f: FunctionLike) -> FunctionLike:
    return gamma_bilinear(graph, 2, f, f)


def gamma_closed_form(graph: Graph, f: FunctionLike, h: Optional[FunctionLike] = None) -> FunctionLike:
    """Gamma(f, h)(x) = 1/2 sum_y q(x,y) (f(y) - f(x)) (h(y) - h(x)); the flow's fast path."""
    fv = vertex_values(graph, f)
    hv = fv if h is None else vertex_values(graph, h)
    src, dst, q = graph.edge_arrays
    weights = 0.5 * q * (fv[dst] - fv[src]) * (hv[dst] - hv[src])
    result = np.bincount(src, weights=weights, minlength=graph.size)
    return match_type(graph, result, f) if h is None else match_type(graph, result, f, h)


def lp_norm(
    f: FunctionLike,
    p: float = math.inf,
    measure: Optional[Union[Measure, np.ndarray]] = None,
    graph: Optional[Graph] = None,
) -> float:
    """l^p norm with respect to ``measure`` (counting measure when omitted); p = inf is the sup-norm."""
    if p < 1:
        raise ValueError("p must be at least 1")
    if graph is not None:
        values = vertex_values(graph, f)
        weights = measure.as_array(graph) if isinstance(measure, Measure) else measure
    elif isinstance(f, VertexFunction):
        keys = list(f.values)
        values = np.array([f.values[x] for x in keys])
        if isinstance(measure, Measure):
            if set(measure.values) != set(keys):
                raise DomainMismatchError("measure domain differs from the function's domain")
            weights = np.array([measure.values[x] for x in keys])
        else:
            weights = measure
    else:
        values = np.asarray(f, dtype=float)
        weights = measure
        if isinstance(weights, Measure):
            raise DomainMismatchError("a Measure needs a graph or a VertexFunction to align against")

    if math.isinf(p):
        return float(np.max(np.abs(values))) if values.size else 0.0
    w = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != values.shape:
        raise DomainMismatchError(f"measure shape {w.shape} differs from function shape {values.shape}")
    return float(np.sum(np.abs(values) ** p * w) ** (1.0 / p))


def local_forms(graph: Graph, x: str) -> LocalForms:
    """Matrices of f -> Gamma_2 f(x), f -> Gamma f(x) and f -> Delta f(x) on the two-ball, gauge f(x) = 0.

    Gamma_k(f, h)(v) is represented as f^T M_k[v] h over the ball. M_0[v] = e_v e_v^T and
    M_{k+1}[v] = 1/2 (sum_w L[v,w] M_k[w] - M_k[v] L - L^T M_k[v]).
    Only generator rows of the one-ball enter Gamma_2 at x, and those rows are complete inside the two-ball.
    """
    center = graph.position(x)
    members = np.flatnonzero(graph.distances[center] <= 2)
    local_center = int(np.flatnonzero(members == center)[0])
    keep = np.array([i for i in range(len(members)) if i != local_center], dtype=np.intp)
    coordinates = tuple(graph.vertices[members[i]] for i in keep)

    if not len(keep):
        empty = np.zeros((0, 0))
        return LocalForms(center=x, coordinates=(), A=empty, B=empty, c=np.zeros(0))

    L = graph.rate_matrix[np.ix_(members, members)] - np.diag(graph.out_degrees[members])
    size = len(members)
    M = np.zeros((size, size, size))
    M[np.arange(size), np.arange(size), np.arange(size)] = 1.0

    forms = []
    for _ in range(2):
        M = 0.5 * (np.einsum("vw,wij->vij", L, M) - M @ L - L.T @ M)
        forms.append(M[local_center])

    def symmetric_block(matrix: np.ndarray) -> np.ndarray:
        block = 0.5 * (matrix + matrix.T)
        return block[np.ix_(keep, keep)]

    return LocalForms(
        center=x,
        coordinates=coordinates,
        A=symmetric_block(forms[1]),
        B=symmetric_block(forms[0]),
        c=L[local_center, keep].copy(),
    )


def parse_vertex_function(text: str, graph: Optional[Graph] = None) -> VertexFunction:
    """Parse a JSON object mapping vertex identifier to number; checks the domain when a graph is given."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise GraphFormatError(f"syntax error: {e.msg}", line=e.lineno, column=e.colno) from None
    if not isinstance(payload, dict):
        raise GraphFormatError("vertex function must be a JSON object")
    values = {}
    for vertex, value in payload.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise GraphFormatError(f"value at vertex {vertex!r} is not a finite number")
        try:
            value = float(value)
        except OverflowError:
            raise GraphFormatError(f"value at vertex {vertex!r} is out of range") from None
        if not math.isfinite(value):
            raise GraphFormatError(f"value at vertex {vertex!r} is not a finite number")
        values[vertex] = value
    function = VertexFunction(values=values)
    if graph is not None:
        function.to_array(graph)
    return function


def serialize_vertex_function(f: VertexFunction, graph: Optional[Graph] = None) -> str:
    """JSON object in the graph's vertex order (insertion order without a graph)."""
    keys = graph.vertices if graph is not None else tuple(f.values)
    if graph is not None:
        f.to_array(graph)
    return json.dumps({x: f.values[x] for x in keys}, indent=2) + "\n"
