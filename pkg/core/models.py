import math
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_serializer, model_validator

from core.errors import DomainMismatchError, GraphFormatError, UnknownVertexError
from utils.config import settings


class FlowStatusKind(str, Enum):
    """Termination status of an integrated flow."""
    COMPLETED = "completed"
    BLEW_UP = "blew-up"
    STEP_UNDERFLOW = "step-underflow"


class VerdictStatus(str, Enum):
    """Outcome of a theorem check."""
    YES = "yes"
    NO = "no"
    HYPOTHESES_NOT_MET = "hypotheses-not-met"
    VACUOUS = "vacuous"


class CurvatureStatus(str, Enum):
    FINITE = "finite"
    VACUOUS = "vacuous"
    UNBOUNDED_BELOW = "unbounded-below"


class Graph(BaseModel):
    """Finite graph with directed jump rates. Absent pairs have rate 0; the diagonal is never stored."""
    model_config = ConfigDict(frozen=True)

    vertices: Tuple[str, ...] = Field(..., min_length=1, description="Vertex identifiers in declared order")
    rates: Dict[Tuple[str, str], float] = Field(default_factory=dict, description="Positive jump rates q(x,y)")

    @model_validator(mode="after")
    def _check_structure(self) -> "Graph":
        seen = set()
        for v in self.vertices:
            if v in seen:
                raise GraphFormatError(f"duplicate vertex: {v!r}")
            seen.add(v)
        for (x, y), rate in self.rates.items():
            if x not in seen:
                raise UnknownVertexError(x)
            if y not in seen:
                raise UnknownVertexError(y)
            if x == y:
                raise GraphFormatError(f"self-loop at {x!r}")
            if not math.isfinite(rate) or rate <= 0:
                raise GraphFormatError(f"nonpositive rate on edge {x!r}->{y!r}: {rate}")
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertices == other.vertices and self.rates == other.rates

    __hash__ = None  # type: ignore[assignment]

    @property
    def size(self) -> int:
        return len(self.vertices)

    @cached_property
    def index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def position(self, x: str) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise UnknownVertexError(x) from None

    def rate(self, x: str, y: str) -> float:
        self.position(x)
        self.position(y)
        return self.rates.get((x, y), 0.0)

    @cached_property
    def edge_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(source index, target index, rate) arrays in sorted edge order."""
        keys = sorted(self.rates, key=lambda e: (self.index[e[0]], self.index[e[1]]))
        src = np.array([self.index[x] for x, _ in keys], dtype=np.intp)
        dst = np.array([self.index[y] for _, y in keys], dtype=np.intp)
        q = np.array([self.rates[e] for e in keys], dtype=float)
        return src, dst, q

    @cached_property
    def rate_matrix(self) -> np.ndarray:
        src, dst, q = self.edge_arrays
        Q = np.zeros((self.size, self.size))
        Q[src, dst] = q
        Q.flags.writeable = False
        return Q

    @cached_property
    def out_degrees(self) -> np.ndarray:
        deg = self.rate_matrix.sum(axis=1)
        deg.flags.writeable = False
        return deg

    @cached_property
    def generator(self) -> np.ndarray:
        """Matrix of the Laplacian: rate matrix minus the diagonal of out-degrees."""
        L = self.rate_matrix - np.diag(self.out_degrees)
        L.flags.writeable = False
        return L

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Symmetrized adjacency: x ~ y iff q(x,y) > 0 or q(y,x) > 0."""
        Q = self.rate_matrix
        A = (Q > 0) | (Q.T > 0)
        A.flags.writeable = False
        return A

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs combinatorial distances in the symmetrized adjacency; inf between components."""
        D = shortest_path(csr_matrix(self.adjacency.astype(float)), method="D", directed=False, unweighted=True)
        D.flags.writeable = False
        return D

    def neighbors(self, x: str) -> List[str]:
        row = self.adjacency[self.position(x)]
        return [self.vertices[j] for j in np.flatnonzero(row)]


class Measure(BaseModel):
    """Strictly positive measure on the vertices."""
    model_config = ConfigDict(frozen=True)

    values: Dict[str, float]

    @field_validator("values")
    @classmethod
    def _positive(cls, v: Dict[str, float]) -> Dict[str, float]:
        for x, mx in v.items():
            if not math.isfinite(mx) or mx <= 0:
                raise ValueError(f"measure must be strictly positive, got m({x})={mx}")
        return v

    def as_array(self, graph: Graph) -> np.ndarray:
        if set(self.values) != set(graph.vertices):
            raise DomainMismatchError("measure domain differs from the graph's vertex set")
        return np.array([self.values[v] for v in graph.vertices], dtype=float)


class NotReversible(BaseModel):
    """Reason a graph admits no reversible measure, with a witness edge or cycle."""
    model_config = ConfigDict(frozen=True)

    reason: Literal["one-directional edge", "cycle condition"]
    witness: List[str] = Field(..., description="Edge (x, y) or cycle vertices in traversal order")


class GraphConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    q_min: float = Field(..., gt=0, description="Minimum positive jump rate")
    max_degree: float = Field(..., gt=0, description="Maximum over x of sum_y q(x,y)")


class VertexFunction(BaseModel):
    """Real-valued function on the vertex set."""
    model_config = ConfigDict(frozen=True)

    values: Dict[str, float]

    @field_validator("values")
    @classmethod
    def _finite(cls, v: Dict[str, float]) -> Dict[str, float]:
        for x, fx in v.items():
            if not math.isfinite(fx):
                raise ValueError(f"non-finite value at vertex {x!r}")
        return v

    @model_serializer
    def _as_mapping(self) -> Dict[str, float]:
        return dict(self.values)

    @classmethod
    def from_array(cls, graph: Graph, values: np.ndarray) -> "VertexFunction":
        arr = np.asarray(values, dtype=float)
        if arr.shape != (graph.size,):
            raise DomainMismatchError(f"expected {graph.size} values, got shape {arr.shape}")
        return cls(values={v: float(arr[i]) for i, v in enumerate(graph.vertices)})

    def to_array(self, graph: Graph) -> np.ndarray:
        if set(self.values) != set(graph.vertices):
            missing = sorted(set(graph.vertices) - set(self.values))
            extra = sorted(set(self.values) - set(graph.vertices))
            raise DomainMismatchError(f"vertex function domain mismatch (missing={missing}, extra={extra})")
        return np.array([self.values[v] for v in graph.vertices], dtype=float)


class LocalForms(BaseModel):
    """Quadratic forms of Gamma_2, Gamma and the linear form of Delta at a vertex.

    Coordinates are the vertices of the two-ball around ``center`` without the center itself;
    the center value is gauged to zero.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    center: str
    coordinates: Tuple[str, ...]
    A: np.ndarray
    B: np.ndarray
    c: np.ndarray

    def lift(self, graph: Graph, v: np.ndarray) -> np.ndarray:
        """Extend a coordinate vector by zero at the center and outside the two-ball."""
        f = np.zeros(graph.size)
        for value, y in zip(v, self.coordinates):
            f[graph.index[y]] = value
        return f


class Dimension(BaseModel):
    """Dimension parameter n in (0, inf]; infinity drops the (Delta f)^2 / n term."""
    model_config = ConfigDict(frozen=True)

    value: float = Field(..., gt=0)

    @model_serializer
    def _as_number(self) -> float:
        return self.value

    @classmethod
    def parse(cls, raw: Union[str, float, "Dimension"]) -> "Dimension":
        if isinstance(raw, Dimension):
            return raw
        if isinstance(raw, str):
            text = raw.strip().lower()
            value = math.inf if text in ("inf", "infinity", "∞") else float(text)
        else:
            value = float(raw)
        return cls(value=value)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def inverse(self) -> float:
        return 0.0 if self.is_infinite else 1.0 / self.value

    def __str__(self) -> str:
        return "inf" if self.is_infinite else repr(self.value)


class CDCheck(BaseModel):
    """Result of a pointwise curvature-dimension test."""
    model_config = ConfigDict(frozen=True)

    vertex: str
    k: float
    dimension: Dimension
    holds: bool
    min_eigenvalue: float
    witness: Optional[VertexFunction] = None


class CurvatureResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    vertex: str
    dimension: Dimension
    optimal_k: float
    status: CurvatureStatus = CurvatureStatus.FINITE
    witness: Optional[VertexFunction] = None


class CurvatureReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    dimension: Dimension
    results: List[CurvatureResult]
    global_k: float

    def by_vertex(self) -> Dict[str, CurvatureResult]:
        return {r.vertex: r for r in self.results}


class SolverConfig(BaseModel):
    """Tolerances and safeguards for the adaptive integrator."""
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=1e-9, gt=0)
    abs_tol: float = Field(default=1e-12, gt=0)
    max_step: float = Field(default=0.1, gt=0)
    blowup_threshold: float = Field(default=1e8, gt=0)
    min_step: float = Field(default=1e-12, gt=0)
    method: Literal["DOP853", "RK45"] = "DOP853"

    @model_validator(mode="after")
    def _check_steps(self) -> "SolverConfig":
        if self.min_step >= self.max_step:
            raise ValueError("min_step must be smaller than max_step")
        return self

    @classmethod
    def from_settings(cls, **overrides: Any) -> "SolverConfig":
        values = dict(
            rel_tol=settings.solver_rel_tol,
            abs_tol=settings.solver_abs_tol,
            max_step=settings.solver_max_step,
            blowup_threshold=settings.blowup_threshold,
            min_step=settings.solver_min_step,
            method=settings.solver_method,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class FlowStatus(BaseModel):
    """Completed, BlewUpAt(t) or StepUnderflow(t). For blow-up, t is the last accepted step time."""
    model_config = ConfigDict(frozen=True)

    kind: FlowStatusKind
    t: Optional[float] = None

    @property
    def completed(self) -> bool:
        return self.kind == FlowStatusKind.COMPLETED


class FlowOutcome(BaseModel):
    """State reached by a flow: the requested time if completed, else the last valid time."""
    model_config = ConfigDict(frozen=True)

    time: float
    state: VertexFunction
    status: FlowStatus


class FlowTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    times: List[float]
    states: List[VertexFunction]
    status: FlowStatus

    @model_validator(mode="after")
    def _check_times(self) -> "FlowTrace":
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("trace times must be strictly increasing")
        return self


class Hypotheses(BaseModel):
    """Hypothesis record of a theorem check; a flag is None when the theorem does not require it."""
    model_config = ConfigDict(frozen=True)

    required_k: Optional[float] = None
    required_n: Optional[Dimension] = None
    curvature_gated: bool = True
    curvature_verified: Optional[bool] = None
    global_k: Optional[float] = None
    gradient_bound_ok: Optional[bool] = None
    gradient_norm: Optional[float] = None
    gradient_limit: Optional[float] = None
    reversibility_ok: Optional[bool] = None
    sign_ok: Optional[bool] = None
    order_ok: Optional[bool] = None
    bidirectional_ok: Optional[bool] = None
    radius_ok: Optional[bool] = None
    dimension_ok: Optional[bool] = None
    degree_ratio_ok: Optional[bool] = None

    def all_met(self) -> bool:
        flags = [
            self.gradient_bound_ok,
            self.reversibility_ok,
            self.sign_ok,
            self.order_ok,
            self.bidirectional_ok,
            self.dimension_ok,
            self.degree_ratio_ok,
        ]
        if self.curvature_gated:
            flags.append(self.curvature_verified)
        return all(flag is not False for flag in flags)


class Verdict(BaseModel):
    """Outcome of one theorem check: worst signed margin (bound minus quantity) and where it occurs."""
    model_config = ConfigDict(frozen=True)

    theorem: str
    hypotheses: Hypotheses
    holds: VerdictStatus
    worst_margin: float
    witness: Dict[str, Any] = Field(default_factory=dict)
    tolerance: float
    instances: int
    details: Dict[str, Any] = Field(default_factory=dict)
