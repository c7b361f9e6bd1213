import itertools
from typing import Dict, Optional, Tuple

from core.errors import GeneratorError
from core.models import Graph

FAMILIES = ("remark", "g-eps", "path", "cycle", "complete", "hypercube", "birth-death")


def _positive(name: str, value: float) -> float:
    if not value > 0:
        raise GeneratorError(f"{name} must be positive, got {value}")
    return float(value)


def _size(value: Optional[int], minimum: int = 1) -> int:
    if value is None:
        raise GeneratorError("--size is required for this family")
    if value < minimum:
        raise GeneratorError(f"size must be at least {minimum}, got {value}")
    return value


def remark_graph() -> Graph:
    """Three-vertex path with q(1,2)=2, q(2,1)=1, q(2,3)=5, q(3,2)=1."""
    return Graph(
        vertices=("1", "2", "3"),
        rates={("1", "2"): 2.0, ("2", "1"): 1.0, ("2", "3"): 5.0, ("3", "2"): 1.0},
    )


def g_eps(eps: float) -> Graph:
    """Three-vertex path with q(1,2)=eps, q(2,1)=4, q(2,3)=1, q(3,2)=4."""
    eps = _positive("eps", eps)
    return Graph(
        vertices=("1", "2", "3"),
        rates={("1", "2"): eps, ("2", "1"): 4.0, ("2", "3"): 1.0, ("3", "2"): 4.0},
    )


def path(size: int, rate: float = 1.0) -> Graph:
    rate = _positive("rate", rate)
    vertices = tuple(str(i) for i in range(_size(size)))
    rates: Dict[Tuple[str, str], float] = {}
    for a, b in zip(vertices, vertices[1:]):
        rates[(a, b)] = rate
        rates[(b, a)] = rate
    return Graph(vertices=vertices, rates=rates)


def cycle(size: int, rate: float = 1.0) -> Graph:
    rate = _positive("rate", rate)
    vertices = tuple(str(i) for i in range(_size(size, minimum=3)))
    rates: Dict[Tuple[str, str], float] = {}
    for i, a in enumerate(vertices):
        b = vertices[(i + 1) % len(vertices)]
        rates[(a, b)] = rate
        rates[(b, a)] = rate
    return Graph(vertices=vertices, rates=rates)


def complete(size: int, rate: float = 1.0) -> Graph:
    rate = _positive("rate", rate)
    vertices = tuple(str(i) for i in range(_size(size)))
    rates = {(a, b): rate for a, b in itertools.permutations(vertices, 2)}
    return Graph(vertices=vertices, rates=rates)


def hypercube(dim: int, rate: float = 1.0) -> Graph:
    """Vertices are bit strings of length dim; neighbors differ in one bit."""
    rate = _positive("rate", rate)
    if dim is None or dim < 1:
        raise GeneratorError(f"dimension must be at least 1, got {dim}")
    vertices = tuple(format(i, f"0{dim}b") for i in range(2 ** dim))
    rates = {}
    for i, v in enumerate(vertices):
        for bit in range(dim):
            rates[(v, vertices[i ^ (1 << bit)])] = rate
    return Graph(vertices=vertices, rates=rates)


def birth_death(size: int, up: float = 1.0, down: float = 1.0) -> Graph:
    """Chain 0..size-1 with q(i, i+1) = up and q(i+1, i) = down."""
    up, down = _positive("up", up), _positive("down", down)
    vertices = tuple(str(i) for i in range(_size(size)))
    rates: Dict[Tuple[str, str], float] = {}
    for a, b in zip(vertices, vertices[1:]):
        rates[(a, b)] = up
        rates[(b, a)] = down
    return Graph(vertices=vertices, rates=rates)


def generate(
    family: str,
    size: Optional[int] = None,
    rate: float = 1.0,
    eps: float = 1.0,
    dim: Optional[int] = None,
    up: float = 1.0,
    down: float = 1.0,
) -> Graph:
    if family == "remark":
        return remark_graph()
    if family == "g-eps":
        return g_eps(eps)
    if family == "path":
        return path(size, rate)
    if family == "cycle":
        return cycle(size, rate)
    if family == "complete":
        return complete(size, rate)
    if family == "hypercube":
        return hypercube(dim, rate)
    if family == "birth-death":
        return birth_death(size, up, down)
    raise GeneratorError(f"unknown family: {family!r} (expected one of {', '.join(FAMILIES)})")
