import bisect
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import DOP853, RK45, DenseOutput

from core.calculus import FunctionLike, match_type, vertex_values
from core.errors import GridError, InvalidArgumentError
from core.models import (
    FlowOutcome,
    FlowStatus,
    FlowStatusKind,
    FlowTrace,
    Graph,
    SolverConfig,
    VertexFunction,
)
from utils.logger import get_logger

logger = get_logger("evolution")

_METHODS = {"DOP853": DOP853, "RK45": RK45}

Field = Callable[[float, np.ndarray], np.ndarray]


def _field(graph: Graph, linear: bool) -> Field:
    src, dst, q = graph.edge_arrays
    size = graph.size

    def heat(t: float, u: np.ndarray) -> np.ndarray:
        return np.bincount(src, weights=q * (u[dst] - u[src]), minlength=size)

    def nonlinear(t: float, u: np.ndarray) -> np.ndarray:
        d = u[dst] - u[src]
        return np.bincount(src, weights=q * d * (1.0 + 0.5 * d), minlength=size)

    return heat if linear else nonlinear


def flow_field(graph: Graph, u: FunctionLike) -> FunctionLike:
    """Right-hand side Delta u + Gamma u of the nonlinear flow."""
    return match_type(graph, _field(graph, linear=False)(0.0, vertex_values(graph, u)), u)


class DenseFlow:
    """Integrated solution on [0, t_reached] with the integrator's dense output between accepted steps."""

    def __init__(self, graph: Graph, u0: np.ndarray, linear: bool):
        self.graph = graph
        self.u0 = u0.copy()
        self.linear = linear
        self.segments: List[Tuple[float, float, DenseOutput]] = []
        self._ends: List[float] = []
        self.t_reached = 0.0
        self.state = u0.copy()
        self.status = FlowStatus(kind=FlowStatusKind.COMPLETED)
        self.steps = 0

    def _append(self, t_old: float, t: float, interpolant: DenseOutput, state: np.ndarray) -> None:
        self.segments.append((t_old, t, interpolant))
        self._ends.append(t)
        self.t_reached = t
        self.state = state.copy()
        self.steps += 1

    def covers(self, t: float) -> bool:
        return 0.0 <= t <= self.t_reached

    def __call__(self, t: float) -> np.ndarray:
        if not self.covers(t):
            raise InvalidArgumentError(f"time {t} outside the integrated range [0, {self.t_reached}]")
        if t == 0.0:
            return self.u0.copy()
        if t == self.t_reached:
            return self.state.copy()
        position = bisect.bisect_left(self._ends, t)
        _, _, interpolant = self.segments[position]
        return np.asarray(interpolant(t), dtype=float)

    def sample(self, times: Sequence[float]) -> np.ndarray:
        """States at ``times`` stacked row-wise."""
        return np.array([self(t) for t in times])

    def derivative(self, t: float, h: float = 1e-5) -> np.ndarray:
        """du/dt at t by second-order differences of the dense output, one-sided at the ends."""
        if not self.covers(t):
            raise InvalidArgumentError(f"time {t} outside the integrated range [0, {self.t_reached}]")
        h = min(h, self.t_reached / 4.0)
        if h <= 0.0:
            raise InvalidArgumentError("derivative needs a positive integrated range")
        if t - h >= 0.0 and self.covers(t + h):
            return (self(t + h) - self(t - h)) / (2.0 * h)
        if self.covers(t + 2.0 * h):
            return (-3.0 * self(t) + 4.0 * self(t + h) - self(t + 2.0 * h)) / (2.0 * h)
        return (3.0 * self(t) - 4.0 * self(t - h) + self(t - 2.0 * h)) / (2.0 * h)


def solve(
    graph: Graph,
    u0: FunctionLike,
    t_end: float,
    cfg: Optional[SolverConfig] = None,
    linear: bool = False,
) -> DenseFlow:
    """Integrate the heat equation (linear) or du/dt = Delta u + Gamma u up to t_end.

    Blow-up is the sup-norm passing cfg.blowup_threshold or a non-finite state; the reported
    time is the last accepted step before it. A step below cfg.min_step is a step underflow.
    """
    cfg = cfg or SolverConfig.from_settings()
    if not math.isfinite(t_end) or t_end < 0:
        raise InvalidArgumentError(f"time must be a finite nonnegative number, got {t_end}")
    start = vertex_values(graph, u0).astype(float)
    flow = DenseFlow(graph, start, linear)
    if t_end == 0.0:
        return flow

    method = _METHODS[cfg.method]
    with np.errstate(over="ignore", invalid="ignore"):
        solver = method(
            _field(graph, linear),
            0.0,
            start,
            t_end,
            max_step=cfg.max_step,
            rtol=cfg.rel_tol,
            atol=cfg.abs_tol,
        )
        while solver.status == "running":
            t_old = solver.t
            message = solver.step()
            if solver.status == "failed":
                flow.status = FlowStatus(kind=FlowStatusKind.STEP_UNDERFLOW, t=t_old)
                logger.warning("Step underflow", t=t_old, detail=message)
                break
            state = solver.y
            if not np.all(np.isfinite(state)) or np.max(np.abs(state)) > cfg.blowup_threshold:
                flow.status = FlowStatus(kind=FlowStatusKind.BLEW_UP, t=t_old)
                logger.warning("Flow blew up", t=t_old, threshold=cfg.blowup_threshold)
                break
            flow._append(t_old, solver.t, solver.dense_output(), state)
            if solver.status == "running" and solver.step_size is not None and solver.step_size < cfg.min_step:
                flow.status = FlowStatus(kind=FlowStatusKind.STEP_UNDERFLOW, t=solver.t)
                logger.warning("Step size below minimum", t=solver.t, step=solver.step_size)
                break

    logger.debug("Integrated", t=flow.t_reached, steps=flow.steps, status=flow.status.kind.value)
    return flow


def heat_semigroup(graph: Graph, f: FunctionLike, t: float, cfg: Optional[SolverConfig] = None) -> FunctionLike:
    """P_t f = e^{t Delta} f; t = 0 returns f exactly."""
    flow = solve(graph, f, t, cfg, linear=True)
    return match_type(graph, flow(flow.t_reached), f)


def nonlinear_flow(graph: Graph, u0: FunctionLike, t: float, cfg: Optional[SolverConfig] = None) -> FlowOutcome:
    """L_t u0, or the last valid state with a blow-up / underflow status."""
    flow = solve(graph, u0, t, cfg)
    return FlowOutcome(
        time=flow.t_reached,
        state=VertexFunction.from_array(graph, flow(flow.t_reached)),
        status=flow.status,
    )


def validate_grid(grid: Sequence[float]) -> List[float]:
    times = [float(t) for t in grid]
    if not times:
        raise GridError("time grid is empty")
    if times[0] != 0.0:
        raise GridError("time grid must start at 0")
    if not all(math.isfinite(t) for t in times):
        raise GridError("time grid contains non-finite values")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise GridError("time grid must be strictly increasing")
    return times


def flow_trace(
    graph: Graph,
    u0: FunctionLike,
    grid: Sequence[float],
    cfg: Optional[SolverConfig] = None,
    linear: bool = False,
) -> FlowTrace:
    """Dense-output snapshots at the grid times reached before any blow-up."""
    times = validate_grid(grid)
    flow = solve(graph, u0, times[-1], cfg, linear=linear)
    reached = [t for t in times if flow.covers(t)]
    states = [VertexFunction.from_array(graph, flow(t)) for t in reached]
    return FlowTrace(times=reached, states=states, status=flow.status)
