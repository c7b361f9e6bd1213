import itertools
import math
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh

from core.calculus import FunctionLike, gamma_closed_form, laplacian, vertex_values
from core.curvature import curvature_function
from core.errors import InvalidArgumentError, NotReversibleError
from core.evolution import DenseFlow, solve, validate_grid
from core.graph_core import constants, is_bidirectional, reversible_measure
from core.models import (
    Dimension,
    Graph,
    Hypotheses,
    Measure,
    NotReversible,
    SolverConfig,
    Verdict,
    VerdictStatus,
    VertexFunction,
)
from utils.config import settings
from utils.logger import get_logger
from workers.worker import evaluation_pool

logger = get_logger("theorems")

INFINITE = Dimension(value=math.inf)

# slack of the curvature gate, matching the bracketing band of curvature_at
_CURVATURE_BAND = 1e-8


class Instance(NamedTuple):
    margin: float
    scale: float
    witness: Dict[str, Any]


def default_grid() -> List[float]:
    """0 followed by settings.grid_points geometric times in [grid_t_min, grid_t_max]."""
    times = np.geomspace(settings.grid_t_min, settings.grid_t_max, settings.grid_points)
    return [0.0] + [float(t) for t in times]


def phi(t: float, k: float) -> float:
    """(e^{2kt} - 1) / (2k), continued by t at k = 0."""
    if k == 0.0:
        return t
    return math.expm1(2.0 * k * t) / (2.0 * k)


def admissible_initial(
    graph: Graph,
    rng: np.random.Generator,
    fraction: float = 0.9,
    nonpositive: bool = False,
) -> VertexFunction:
    """Random u0 scaled so that ||Gamma u0||_inf = fraction * q_min / 2.

    With ``nonpositive`` the function is shifted by its maximum, which leaves Gamma unchanged.
    """
    q_min = constants(graph).q_min
    values = rng.standard_normal(graph.size)
    energy = float(np.max(gamma_closed_form(graph, values)))
    if energy > 0:
        values = values * math.sqrt(fraction * q_min / 2.0 / energy)
    else:
        values = np.zeros(graph.size)
    if nonpositive:
        values = values - values.max()
    return VertexFunction.from_array(graph, values)


def distance_cone_initial(graph: Graph, x: str, c: float, r: float) -> VertexFunction:
    """u0 = max(-c d(x, .) / r, -c)."""
    if r <= 0:
        raise InvalidArgumentError("cone radius must be positive")
    d = graph.distances[graph.position(x)]
    return VertexFunction.from_array(graph, np.maximum(-c * d / r, -c))


def volume_growth_ratio(graph: Graph, x: str, r: int, measure: Optional[Measure] = None) -> float:
    """m(B_{2r}(x)) / m(B_r(x))."""
    measure = measure or _require_measure(graph)
    m = measure.as_array(graph)
    row = graph.distances[graph.position(x)]
    return float(m[row <= 2 * r].sum() / m[row <= r].sum())


def doubling_profile(graph: Graph, measure: Optional[Measure] = None) -> Dict[str, Any]:
    """Largest ratio m(B_{2r}(x)) / m(B_r(x)) over all vertices and radii 1 .. eccentricity."""
    measure = measure or _require_measure(graph)
    m = measure.as_array(graph)
    best = {"ratio": 1.0, "vertex": graph.vertices[0], "radius": 0}
    for i, x in enumerate(graph.vertices):
        row = graph.distances[i]
        finite = row[np.isfinite(row)]
        for r in range(1, int(finite.max()) + 1):
            ratio = float(m[row <= 2 * r].sum() / m[row <= r].sum())
            if ratio > best["ratio"]:
                best = {"ratio": ratio, "vertex": x, "radius": r}
    return best


def spectral_gap(graph: Graph) -> float:
    """Second-smallest eigenvalue of -Delta, self-adjoint on l^2(m)."""
    measure = _require_measure(graph)
    if graph.size == 1:
        return 0.0
    root = np.sqrt(measure.as_array(graph))
    S = (root[:, None] * -graph.generator) / root[None, :]
    values = eigvalsh(0.5 * (S + S.T))
    return max(float(values[1]), 0.0)


def _require_measure(graph: Graph) -> Measure:
    measure = reversible_measure(graph)
    if isinstance(measure, NotReversible):
        raise NotReversibleError(measure)
    return measure


# Verdict machinery


def _tie_key(witness: Dict[str, Any]) -> Tuple:
    return tuple((k, repr(v)) for k, v in sorted(witness.items()))


def _worst(instances: Sequence[Instance]) -> Instance:
    return min(instances, key=lambda inst: (inst.margin, _tie_key(inst.witness)))


def _midpoint(a: float, b: float) -> float:
    return math.sqrt(a * b) if a > 0 else 0.5 * (a + b)


def _scan(times: Sequence[float], evaluate: Callable[[float], List[Instance]]) -> List[Instance]:
    """Evaluate on the grid, then refine around the worst time using the dense output."""
    times = sorted(set(times))
    records = {t: evaluate(t) for t in times}
    for _ in range(settings.refinement_rounds):
        scored = [t for t in times if records[t]]
        if not scored:
            break
        worst_t = min(scored, key=lambda t: min(inst.margin for inst in records[t]))
        i = times.index(worst_t)
        candidates = []
        if i > 0:
            candidates.append(_midpoint(times[i - 1], worst_t))
        if i + 1 < len(times):
            candidates.append(_midpoint(worst_t, times[i + 1]))
        for t in candidates:
            if t not in records:
                records[t] = evaluate(t)
        times = sorted(records)
    return [inst for t in times for inst in records[t]]


def _branch_margins(instances: Sequence[Instance]) -> Dict[str, float]:
    margins: Dict[str, float] = {}
    for inst in instances:
        branch = inst.witness.get("branch")
        if branch is not None:
            margins[branch] = min(margins.get(branch, math.inf), inst.margin)
    return margins


def _assemble(
    theorem: str,
    hypotheses: Hypotheses,
    instances: Sequence[Instance],
    cfg: SolverConfig,
    details: Optional[Dict[str, Any]] = None,
) -> Verdict:
    details = dict(details or {})
    branches = _branch_margins(instances)
    if branches:
        details.setdefault("branch_margins", branches)

    scales = [inst.scale for inst in instances if math.isfinite(inst.scale)]
    tolerance = settings.verdict_tolerance + 10.0 * cfg.rel_tol * max(scales, default=1.0)

    if instances:
        worst = _worst(instances)
        worst_margin, witness = worst.margin, worst.witness
    else:
        worst_margin, witness = details.pop("vacuous_margin", math.inf), {}

    if not hypotheses.all_met():
        holds = VerdictStatus.HYPOTHESES_NOT_MET
    elif not instances:
        holds = VerdictStatus.VACUOUS
    elif worst_margin >= -tolerance:
        holds = VerdictStatus.YES
    else:
        holds = VerdictStatus.NO

    if holds == VerdictStatus.NO:
        logger.warning("Violation", theorem=theorem, margin=worst_margin, witness=witness)
    elif holds == VerdictStatus.HYPOTHESES_NOT_MET:
        logger.info("Hypotheses not met", theorem=theorem)

    return Verdict(
        theorem=theorem,
        hypotheses=hypotheses,
        holds=holds,
        worst_margin=worst_margin,
        witness=witness,
        tolerance=tolerance,
        instances=len(instances),
        details=details,
    )


def _gradient_hypothesis(graph: Graph, u0: np.ndarray) -> Dict[str, Any]:
    """||Gamma u0||_inf <= q_min / 2, equality accepted."""
    limit = constants(graph).q_min / 2.0
    norm = float(np.max(gamma_closed_form(graph, u0)))
    return {
        "gradient_bound_ok": norm <= limit * (1.0 + 1e-12),
        "gradient_norm": norm,
        "gradient_limit": limit,
    }


def _curvature_hypothesis(graph: Graph, k: float, n: Dimension) -> Dict[str, Any]:
    global_k = curvature_function(graph, n).global_k
    return {
        "required_k": k,
        "required_n": n,
        "curvature_verified": bool(global_k >= k - _CURVATURE_BAND),
        "global_k": global_k,
    }


def _default_k(graph: Graph, k: Optional[float]) -> float:
    if k is not None:
        if not math.isfinite(k) or k < 0:
            raise InvalidArgumentError(f"K must be a finite nonnegative number, got {k}")
        return float(k)
    global_k = curvature_function(graph, INFINITE).global_k
    return max(global_k, 0.0) if math.isfinite(global_k) else 0.0


def _finite_dimension(n: Union[Dimension, str, float]) -> Dimension:
    n = Dimension.parse(n)
    if n.is_infinite:
        raise InvalidArgumentError("this check needs a finite dimension n")
    return n


def _flow_completion(flows: Iterable[DenseFlow], t_end: float, details: Dict[str, Any]) -> List[Instance]:
    """A flow stopping early under met hypotheses contradicts long-time existence."""
    instances = []
    for flow in flows:
        if flow.t_reached < t_end:
            details["flow_status"] = {"kind": flow.status.kind.value, "t": flow.status.t}
            instances.append(Instance(-math.inf, 1.0, {"stopped_at": flow.t_reached}))
    return instances


def _covered(times: Sequence[float], *flows: DenseFlow) -> List[float]:
    return [t for t in times if all(flow.covers(t) for flow in flows)]


def verify_gradient_decay(
    graph: Graph,
    u0: FunctionLike,
    K: Optional[float] = None,
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
    gate_curvature: bool = True,
) -> Verdict:
    """||Gamma u_t||_inf <= e^{-2Kt} ||Gamma u_0||_inf, and |u_t(y) - u_t(x)| <= 1 across edges.

    With ``gate_curvature=False`` the curvature bound K is a claim under test, not a hypothesis.
    """
    cfg = cfg or SolverConfig.from_settings()
    times = validate_grid(grid if grid is not None else default_grid())
    start = vertex_values(graph, u0)
    k = _default_k(graph, K)
    hypotheses = Hypotheses(
        curvature_gated=gate_curvature,
        **_gradient_hypothesis(graph, start),
        **_curvature_hypothesis(graph, k, INFINITE),
    )

    flow = solve(graph, start, times[-1], cfg)
    initial = float(np.max(gamma_closed_form(graph, start)))
    upper = np.triu(graph.adjacency)
    src, dst = np.nonzero(upper)

    def evaluate(t: float) -> List[Instance]:
        u = flow(t)
        g = gamma_closed_form(graph, u)
        worst = int(np.argmax(g))
        bound = math.exp(-2.0 * k * t) * initial
        out = [Instance(bound - float(g[worst]), max(1.0, initial), {"branch": "decay", "t": t, "vertex": graph.vertices[worst]})]
        if len(src):
            jumps = np.abs(u[dst] - u[src])
            e = int(np.argmax(jumps))
            out.append(Instance(1.0 - float(jumps[e]), max(1.0, float(np.max(np.abs(u)))), {
                "branch": "edge", "t": t, "pair": [graph.vertices[src[e]], graph.vertices[dst[e]]],
            }))
        return out

    details: Dict[str, Any] = {"K": k}
    instances = _scan(_covered(times, flow), evaluate) + _flow_completion([flow], times[-1], details)
    return _assemble("gradient", hypotheses, instances, cfg, details)


def verify_monotonicity(
    graph: Graph,
    f: FunctionLike,
    h: FunctionLike,
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """L_t h >= L_t f whenever h >= f."""
    cfg = cfg or SolverConfig.from_settings()
    times = validate_grid(grid if grid is not None else default_grid())
    lower, upper = vertex_values(graph, f), vertex_values(graph, h)
    hypotheses = Hypotheses(
        order_ok=bool(np.all(upper >= lower)),
        **_gradient_hypothesis(graph, lower),
        **_curvature_hypothesis(graph, 0.0, INFINITE),
    )

    flow_f = solve(graph, lower, times[-1], cfg)
    flow_h = solve(graph, upper, times[-1], cfg)

    def evaluate(t: float) -> List[Instance]:
        uf, uh = flow_f(t), flow_h(t)
        gap = uh - uf
        i = int(np.argmin(gap))
        scale = max(1.0, float(np.max(np.abs(uf))), float(np.max(np.abs(uh))))
        return [Instance(float(gap[i]), scale, {"t": t, "vertex": graph.vertices[i]})]

    details: Dict[str, Any] = {}
    instances = _scan(_covered(times, flow_f, flow_h), evaluate)
    if hypotheses.gradient_bound_ok:
        instances += _flow_completion([flow_f], times[-1], details)
    return _assemble("monotone", hypotheses, instances, cfg, details)


def verify_semigroup_comparison(
    graph: Graph,
    u0: FunctionLike,
    alpha_hi: Optional[float] = None,
    alpha_lo: Optional[float] = None,
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """P_t e^{a u0} >= e^{a u_t} for a = alpha_hi, and the reverse inequality for a = alpha_lo."""
    cfg = cfg or SolverConfig.from_settings()
    alpha_hi = settings.alpha_hi if alpha_hi is None else alpha_hi
    alpha_lo = settings.alpha_lo if alpha_lo is None else alpha_lo
    times = validate_grid(grid if grid is not None else default_grid())
    start = vertex_values(graph, u0)
    hypotheses = Hypotheses(
        **_gradient_hypothesis(graph, start),
        **_curvature_hypothesis(graph, 0.0, INFINITE),
    )

    flow = solve(graph, start, times[-1], cfg)
    heat_hi = solve(graph, np.exp(alpha_hi * start), times[-1], cfg, linear=True)
    heat_lo = solve(graph, np.exp(alpha_lo * start), times[-1], cfg, linear=True)

    def evaluate(t: float) -> List[Instance]:
        u = flow(t)
        out = []
        for branch, alpha, heat, sign in (("alpha_hi", alpha_hi, heat_hi, 1.0), ("alpha_lo", alpha_lo, heat_lo, -1.0)):
            smoothed = heat(t)
            pushed = np.exp(alpha * u)
            margin = sign * (smoothed - pushed)
            i = int(np.argmin(margin))
            scale = max(1.0, float(np.max(smoothed)), float(np.max(pushed)))
            out.append(Instance(float(margin[i]), scale, {"branch": branch, "t": t, "vertex": graph.vertices[i]}))
        return out

    details: Dict[str, Any] = {
        "alpha_hi": alpha_hi,
        "alpha_lo": alpha_lo,
        "alpha_covered": alpha_hi >= 1.60 and alpha_lo <= 0.76,
    }
    instances = _scan(_covered(times, flow), evaluate) + _flow_completion([flow], times[-1], details)
    return _assemble("semigroup", hypotheses, instances, cfg, details)


def verify_l1_comparison(
    graph: Graph,
    u0: FunctionLike,
    alpha_hi: Optional[float] = None,
    alpha_lo: Optional[float] = None,
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """||e^{a u_t}||_1 is nonincreasing in t for a = alpha_hi and nondecreasing for a = alpha_lo.

    Margins are differences between consecutive grid times, so there is no refinement.
    """
    cfg = cfg or SolverConfig.from_settings()
    alpha_hi = settings.l1_alpha_hi if alpha_hi is None else alpha_hi
    alpha_lo = settings.l1_alpha_lo if alpha_lo is None else alpha_lo
    times = validate_grid(grid if grid is not None else default_grid())
    start = vertex_values(graph, u0)
    details: Dict[str, Any] = {
        "alpha_hi": alpha_hi,
        "alpha_lo": alpha_lo,
        "alpha_covered": alpha_hi >= math.log(3.0) and alpha_lo <= 1.0,
    }

    measure = reversible_measure(graph)
    if isinstance(measure, NotReversible):
        details["not_reversible"] = measure.model_dump()
        hypotheses = Hypotheses(reversibility_ok=False, **_gradient_hypothesis(graph, start))
        return _assemble("l1", hypotheses, [], cfg, details)

    hypotheses = Hypotheses(
        reversibility_ok=True,
        **_gradient_hypothesis(graph, start),
        **_curvature_hypothesis(graph, 0.0, INFINITE),
    )
    m = measure.as_array(graph)
    flow = solve(graph, start, times[-1], cfg)
    covered = _covered(times, flow)
    states = flow.sample(covered)

    instances: List[Instance] = []
    for branch, alpha, sign in (("alpha_hi", alpha_hi, 1.0), ("alpha_lo", alpha_lo, -1.0)):
        norms = np.exp(alpha * states) @ m
        for i in range(len(covered) - 1):
            margin = sign * float(norms[i] - norms[i + 1])
            scale = max(1.0, float(norms[i]), float(norms[i + 1]))
            instances.append(Instance(margin, scale, {"branch": branch, "t1": covered[i], "t2": covered[i + 1]}))
    instances += _flow_completion([flow], times[-1], details)
    return _assemble("l1", hypotheses, instances, cfg, details)


def verify_li_yau(
    graph: Graph,
    u0: FunctionLike,
    n: Union[Dimension, str, float],
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """-Delta u_t <= n / (2t).

    The identity Gamma u_t - du/dt = -Delta u_t is checked along the way, with du/dt taken from the
    dense output; its largest relative residual is recorded in the details.
    """
    cfg = cfg or SolverConfig.from_settings()
    n = _finite_dimension(n)
    times = validate_grid(grid if grid is not None else default_grid())
    start = vertex_values(graph, u0)
    hypotheses = Hypotheses(
        **_gradient_hypothesis(graph, start),
        **_curvature_hypothesis(graph, 0.0, n),
    )

    flow = solve(graph, start, times[-1], cfg)
    residual = 0.0

    def evaluate(t: float) -> List[Instance]:
        nonlocal residual
        u = flow(t)
        delta = laplacian(graph, u)
        if flow.t_reached > 0.0:
            identity = gamma_closed_form(graph, u) - flow.derivative(t) + delta
            residual = max(residual, float(np.max(np.abs(identity))) / max(1.0, float(np.max(np.abs(delta)))))
        if t == 0.0:
            return []
        margin = n.value / (2.0 * t) + delta
        i = int(np.argmin(margin))
        scale = max(1.0, float(np.max(np.abs(delta))))
        return [Instance(float(margin[i]), scale, {"t": t, "vertex": graph.vertices[i]})]

    details: Dict[str, Any] = {}
    instances = _scan(_covered(times, flow), evaluate) + _flow_completion([flow], times[-1], details)
    details["identity_residual"] = residual
    return _assemble("li-yau", hypotheses, instances, cfg, details)


def verify_harnack(
    graph: Graph,
    u0: FunctionLike,
    n: Union[Dimension, str, float],
    pairs: Optional[Sequence[Tuple[str, str]]] = None,
    T_pairs: Optional[Sequence[Tuple[float, float]]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """u_{T1}(x) - u_{T2}(y) <= (n/2) log(T2/T1) + 2 d(x,y)^2 / (q_min (T2 - T1)) for 0 < T1 < T2."""
    cfg = cfg or SolverConfig.from_settings()
    n = _finite_dimension(n)
    start = vertex_values(graph, u0)
    hypotheses = Hypotheses(
        **_gradient_hypothesis(graph, start),
        **_curvature_hypothesis(graph, 0.0, n),
    )

    if T_pairs is None:
        samples = np.geomspace(settings.grid_t_min, settings.grid_t_max, settings.harnack_times)
        T_pairs = [(float(a), float(b)) for a, b in itertools.combinations(samples, 2)]
    for T1, T2 in T_pairs:
        if not 0 < T1 < T2:
            raise InvalidArgumentError(f"time pairs need 0 < T1 < T2, got ({T1}, {T2})")
    if pairs is None:
        pairs = list(itertools.product(graph.vertices, repeat=2))
    indices = [(graph.position(x), graph.position(y)) for x, y in pairs]

    q_min = constants(graph).q_min
    t_end = max(T2 for _, T2 in T_pairs) if T_pairs else 0.0
    flow = solve(graph, start, t_end, cfg)

    instances: List[Instance] = []
    for T1, T2 in T_pairs:
        if not flow.covers(T2):
            continue
        early, late = flow(T1), flow(T2)
        scale = max(1.0, float(np.max(np.abs(early))), float(np.max(np.abs(late))))
        for (i, j), (x, y) in zip(indices, pairs):
            d = graph.distances[i, j]
            if math.isinf(d):
                continue
            bound = 0.5 * n.value * math.log(T2 / T1) + 2.0 * d * d / (q_min * (T2 - T1))
            instances.append(Instance(bound - float(early[i] - late[j]), scale, {"x": x, "y": y, "T1": T1, "T2": T2}))

    details: Dict[str, Any] = {"time_pairs": len(T_pairs)}
    instances += _flow_completion([flow], t_end, details)
    return _assemble("harnack", hypotheses, instances, cfg, details)


def verify_hamilton(
    graph: Graph,
    u0: FunctionLike,
    K: Optional[float] = None,
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """Gamma u_t <= -u_t / phi(t) for u0 <= 0."""
    cfg = cfg or SolverConfig.from_settings()
    times = validate_grid(grid if grid is not None else default_grid())
    start = vertex_values(graph, u0)
    k = _default_k(graph, K)
    hypotheses = Hypotheses(
        sign_ok=bool(np.all(start <= 0)),
        **_gradient_hypothesis(graph, start),
        **_curvature_hypothesis(graph, k, INFINITE),
    )

    flow = solve(graph, start, times[-1], cfg)

    def evaluate(t: float) -> List[Instance]:
        if t == 0.0:
            return []
        u = flow(t)
        g = gamma_closed_form(graph, u)
        bound = -u / phi(t, k)
        margin = bound - g
        i = int(np.argmin(margin))
        scale = max(1.0, float(np.max(np.abs(bound))), float(np.max(g)))
        return [Instance(float(margin[i]), scale, {"t": t, "vertex": graph.vertices[i]})]

    details: Dict[str, Any] = {"K": k}
    instances = _scan(_covered(times, flow), evaluate) + _flow_completion([flow], times[-1], details)
    return _assemble("hamilton", hypotheses, instances, cfg, details)


def verify_hamilton_harnack(
    graph: Graph,
    u0: FunctionLike,
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """|sqrt(-u_t(y)) - sqrt(-u_t(x))| <= d(x,y) / sqrt(2 t q_min) for u0 <= 0 and bidirectional rates."""
    cfg = cfg or SolverConfig.from_settings()
    times = validate_grid(grid if grid is not None else default_grid())
    start = vertex_values(graph, u0)
    hypotheses = Hypotheses(
        sign_ok=bool(np.all(start <= 0)),
        bidirectional_ok=is_bidirectional(graph),
        **_gradient_hypothesis(graph, start),
        **_curvature_hypothesis(graph, 0.0, INFINITE),
    )

    q_min = constants(graph).q_min
    src, dst = np.triu_indices(graph.size, k=1)
    d = graph.distances[src, dst]
    finite = np.isfinite(d)
    src, dst, d = src[finite], dst[finite], d[finite]
    flow = solve(graph, start, times[-1], cfg)

    def evaluate(t: float) -> List[Instance]:
        if t == 0.0 or not len(src):
            return []
        root = np.sqrt(np.clip(-flow(t), 0.0, None))
        margin = d / math.sqrt(2.0 * t * q_min) - np.abs(root[dst] - root[src])
        e = int(np.argmin(margin))
        scale = max(1.0, float(np.max(root)))
        return [Instance(float(margin[e]), scale, {"t": t, "pair": [graph.vertices[src[e]], graph.vertices[dst[e]]]})]

    details: Dict[str, Any] = {}
    instances = _scan(_covered(times, flow), evaluate) + _flow_completion([flow], times[-1], details)
    return _assemble("hamilton-harnack", hypotheses, instances, cfg, details)


def verify_linear_gradient_bound(
    graph: Graph,
    u0: FunctionLike,
    n: Union[Dimension, str, float],
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """(Delta P_t u0)^2 <= (n / 2t) (P_t Gamma u0 - Gamma P_t u0)."""
    cfg = cfg or SolverConfig.from_settings()
    n = _finite_dimension(n)
    times = validate_grid(grid if grid is not None else default_grid())
    start = vertex_values(graph, u0)
    hypotheses = Hypotheses(**_curvature_hypothesis(graph, 0.0, n))

    heat = solve(graph, start, times[-1], cfg, linear=True)
    heat_energy = solve(graph, gamma_closed_form(graph, start), times[-1], cfg, linear=True)

    def evaluate(t: float) -> List[Instance]:
        if t == 0.0:
            return []
        v = heat(t)
        lhs = laplacian(graph, v) ** 2
        smoothed, energy = heat_energy(t), gamma_closed_form(graph, v)
        rhs = n.value / (2.0 * t) * (smoothed - energy)
        margin = rhs - lhs
        i = int(np.argmin(margin))
        scale = max(1.0, float(np.max(lhs)), n.value / (2.0 * t) * float(np.max(np.abs(smoothed))))
        return [Instance(float(margin[i]), scale, {"t": t, "vertex": graph.vertices[i]})]

    instances = _scan(_covered(times, heat, heat_energy), evaluate)
    return _assemble("lin-gradient", hypotheses, instances, cfg)


def verify_reverse_poincare(
    graph: Graph,
    f: FunctionLike,
    K: float = 0.0,
    grid: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """Gamma P_t f <= (P_t f^2 - (P_t f)^2) / (2 phi(t)) under CD(K, inf); phi(t) = t at K = 0."""
    cfg = cfg or SolverConfig.from_settings()
    k = _default_k(graph, K)
    times = validate_grid(grid if grid is not None else default_grid())
    start = vertex_values(graph, f)
    hypotheses = Hypotheses(**_curvature_hypothesis(graph, k, INFINITE))

    heat = solve(graph, start, times[-1], cfg, linear=True)
    heat_square = solve(graph, start ** 2, times[-1], cfg, linear=True)

    def evaluate(t: float) -> List[Instance]:
        if t == 0.0:
            return []
        v = heat(t)
        variance = heat_square(t) - v ** 2
        g = gamma_closed_form(graph, v)
        margin = variance / (2.0 * phi(t, k)) - g
        i = int(np.argmin(margin))
        scale = max(1.0, float(np.max(heat_square(t))) / (2.0 * phi(t, k)))
        return [Instance(float(margin[i]), scale, {"t": t, "vertex": graph.vertices[i]})]

    instances = _scan(_covered(times, heat, heat_square), evaluate)
    return _assemble("reverse-poincare", hypotheses, instances, cfg, {"K": k})


def _log_doubling_bound(n: float, degree: float, q_min: float) -> float:
    return 3.0 * n * math.log(9.0 * n * math.sqrt(degree / q_min))


def verify_volume_doubling(
    graph: Graph,
    n: Union[Dimension, str, float],
    cfg: Optional[SolverConfig] = None,
) -> Verdict:
    """m(B_{2r}(x)) <= (9n sqrt(D/q_min))^{3n} m(B_r(x)) for r >= 4 n^2 D / q_min.

    A pair (x, r) is admissible when r reaches the threshold and B_{2r}(x) is not the whole graph.
    Radii admitted only by the weaker 4 n^2 sqrt(D / q_min) threshold are counted in the details.
    """
    cfg = cfg or SolverConfig.from_settings()
    n = _finite_dimension(n)
    consts = constants(graph)
    ratio = consts.max_degree / consts.q_min
    threshold = 4.0 * n.value ** 2 * ratio
    proof_threshold = 4.0 * n.value ** 2 * math.sqrt(ratio)
    log_bound = _log_doubling_bound(n.value, consts.max_degree, consts.q_min)
    bound = math.exp(log_bound) if log_bound < 700.0 else math.inf

    details: Dict[str, Any] = {
        "threshold": threshold,
        "proof_threshold": proof_threshold,
        "bound": bound,
        "log_bound": log_bound,
    }
    measure = reversible_measure(graph)
    if isinstance(measure, NotReversible):
        details["not_reversible"] = measure.model_dump()
        hypotheses = Hypotheses(reversibility_ok=False, dimension_ok=n.value >= 2, degree_ratio_ok=ratio >= 2)
        return _assemble("doubling", hypotheses, [], cfg, details)

    hypotheses = Hypotheses(
        reversibility_ok=True,
        dimension_ok=n.value >= 2,
        degree_ratio_ok=ratio >= 2,
        radius_ok=None,
        **_curvature_hypothesis(graph, 0.0, n),
    )
    m = measure.as_array(graph)

    def per_vertex(i: int) -> Tuple[List[Instance], int]:
        row = graph.distances[i]
        eccentricity = int(row[np.isfinite(row)].max())
        found, proof_only = [], 0
        r = max(1, math.ceil(min(threshold, proof_threshold)))
        while 2 * r < eccentricity:
            if r >= threshold:
                growth = float(m[row <= 2 * r].sum() / m[row <= r].sum())
                found.append(Instance(bound - growth, max(1.0, growth), {"vertex": graph.vertices[i], "r": r}))
            else:
                proof_only += 1
            r += 1
        return found, proof_only

    results = evaluation_pool.map(per_vertex, range(graph.size))
    instances = [inst for found, _ in results for inst in found]
    details["proof_radius_only"] = sum(count for _, count in results)
    if not instances:
        details["vacuous_margin"] = bound - 1.0
        logger.info("No admissible (x, r) below threshold", theorem="doubling", threshold=threshold)
    hypotheses = hypotheses.model_copy(update={"radius_ok": bool(instances)})
    return _assemble("doubling", hypotheses, instances, cfg, details)
