import math
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy.linalg import eigh

from core.calculus import local_forms
from core.errors import InvalidArgumentError
from core.models import (
    CDCheck,
    CurvatureReport,
    CurvatureResult,
    CurvatureStatus,
    Dimension,
    Graph,
    LocalForms,
    VertexFunction,
)
from utils.config import settings
from utils.logger import get_logger
from workers.worker import evaluation_pool

logger = get_logger("curvature")

_MAX_EXPANSIONS = 200
_MAX_BISECTIONS = 400


def _min_eigenpair(matrix: np.ndarray) -> Tuple[float, np.ndarray, float]:
    """Smallest eigenvalue, its eigenvector and the spectral scale max(1, max |lambda|)."""
    values, vectors = eigh(matrix)
    scale = max(1.0, float(np.max(np.abs(values))))
    return float(values[0]), vectors[:, 0], scale


def _is_psd(matrix: np.ndarray) -> bool:
    if matrix.size == 0:
        return True
    smallest, _, scale = _min_eigenpair(matrix)
    return smallest >= -settings.psd_tolerance * scale


def _cd_form(forms: LocalForms, k: float, n: Dimension) -> np.ndarray:
    return forms.A - k * forms.B - n.inverse * np.outer(forms.c, forms.c)


def cd_check(
    graph: Graph,
    x: str,
    k: float,
    n: Union[Dimension, str, float],
    forms: Optional[LocalForms] = None,
) -> CDCheck:
    """Decide Gamma_2 f(x) >= (1/n)(Delta f(x))^2 + k Gamma f(x) for all f.

    Holds iff A - kB - (1/n) cc^T is positive semidefinite; otherwise the witness is an
    eigenvector of its smallest eigenvalue lifted to the whole graph.
    """
    n = Dimension.parse(n)
    if not math.isfinite(k):
        raise InvalidArgumentError(f"curvature bound must be finite, got {k}")
    forms = forms if forms is not None else local_forms(graph, x)
    if not forms.coordinates:
        return CDCheck(vertex=x, k=k, dimension=n, holds=True, min_eigenvalue=0.0)

    smallest, vector, scale = _min_eigenpair(_cd_form(forms, k, n))
    holds = smallest >= -settings.psd_tolerance * scale
    witness = None if holds else VertexFunction.from_array(graph, forms.lift(graph, vector))
    return CDCheck(vertex=x, k=k, dimension=n, holds=holds, min_eigenvalue=smallest, witness=witness)


def _kernel_blocks_unbounded(shifted: np.ndarray, B: np.ndarray) -> bool:
    """True when no k makes shifted - kB PSD: the form fails on ker(B) or couples to a null direction there."""
    beta, basis = eigh(B)
    cutoff = settings.kernel_tolerance * max(1.0, float(np.max(np.abs(beta))))
    kernel = basis[:, beta <= cutoff]
    support = basis[:, beta > cutoff]
    if kernel.shape[1] == 0:
        return False

    block = kernel.T @ shifted @ kernel
    values, vectors = eigh(block)
    scale = max(1.0, float(np.max(np.abs(values))), float(np.max(np.abs(shifted))))
    if values[0] < -settings.psd_tolerance * scale:
        return True
    null = vectors[:, values <= settings.psd_tolerance * scale]
    if null.shape[1] == 0 or support.shape[1] == 0:
        return False
    coupling = null.T @ kernel.T @ shifted @ support
    return bool(np.max(np.abs(coupling)) > settings.psd_tolerance * scale)


def _witness(graph: Graph, forms: LocalForms, k: float, n: Dimension) -> VertexFunction:
    _, vector, _ = _min_eigenpair(_cd_form(forms, k, n))
    energy = float(vector @ forms.B @ vector)
    if energy > 1e-14:
        vector = vector / math.sqrt(energy)
    return VertexFunction.from_array(graph, forms.lift(graph, vector))


def curvature_at(
    graph: Graph,
    x: str,
    n: Union[Dimension, str, float],
    forms: Optional[LocalForms] = None,
) -> CurvatureResult:
    """Optimal K(x, n) = sup{k : CD(k, n) holds at x}, by bisection on k with a PSD test per step."""
    n = Dimension.parse(n)
    forms = forms if forms is not None else local_forms(graph, x)

    if not forms.coordinates:
        logger.warning("No neighbors; curvature is vacuous", vertex=x)
        return CurvatureResult(vertex=x, dimension=n, optimal_k=math.inf, status=CurvatureStatus.VACUOUS)

    shifted = forms.A - n.inverse * np.outer(forms.c, forms.c)
    beta = eigh(forms.B, eigvals_only=True)
    beta_max = float(beta[-1])
    if beta_max <= settings.kernel_tolerance:
        # Gamma vanishes at x: k plays no role
        if _is_psd(shifted):
            logger.warning("Gamma form vanishes; curvature is vacuous", vertex=x)
            return CurvatureResult(vertex=x, dimension=n, optimal_k=math.inf, status=CurvatureStatus.VACUOUS)
        logger.warning("Gamma form vanishes and CD fails for every k", vertex=x)
        return CurvatureResult(vertex=x, dimension=n, optimal_k=-math.inf, status=CurvatureStatus.UNBOUNDED_BELOW)

    if _kernel_blocks_unbounded(shifted, forms.B):
        logger.warning("CD condition fails on ker(Gamma); curvature unbounded below", vertex=x)
        return CurvatureResult(vertex=x, dimension=n, optimal_k=-math.inf, status=CurvatureStatus.UNBOUNDED_BELOW)

    def holds(k: float) -> bool:
        return _is_psd(shifted - k * forms.B)

    beta_min = float(beta[beta > settings.kernel_tolerance * max(1.0, beta_max)][0])
    norm_A = float(np.linalg.norm(forms.A, 2))
    lo = -(norm_A + n.inverse * float(forms.c @ forms.c)) / beta_min - 1.0
    hi = float(np.linalg.norm(shifted, 2)) / beta_max + 1.0

    for _ in range(_MAX_EXPANSIONS):
        if holds(lo):
            break
        lo = 2.0 * lo
    else:
        logger.warning("No lower bracket; treating as unbounded below", vertex=x)
        return CurvatureResult(vertex=x, dimension=n, optimal_k=-math.inf, status=CurvatureStatus.UNBOUNDED_BELOW)

    for _ in range(_MAX_EXPANSIONS):
        if not holds(hi):
            break
        hi = 2.0 * hi + 1.0

    for _ in range(_MAX_BISECTIONS):
        if hi - lo <= settings.curvature_tolerance:
            break
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if holds(mid):
            lo = mid
        else:
            hi = mid

    return CurvatureResult(
        vertex=x,
        dimension=n,
        optimal_k=lo,
        status=CurvatureStatus.FINITE,
        witness=_witness(graph, forms, hi, n),
    )


def all_local_forms(graph: Graph) -> Dict[str, LocalForms]:
    forms = evaluation_pool.map(lambda x: local_forms(graph, x), graph.vertices)
    return dict(zip(graph.vertices, forms))


def curvature_function(
    graph: Graph,
    n: Union[Dimension, str, float],
    forms: Optional[Dict[str, LocalForms]] = None,
) -> CurvatureReport:
    """curvature_at for every vertex; global_k is the minimum over vertices."""
    n = Dimension.parse(n)
    forms = forms if forms is not None else all_local_forms(graph)
    results = evaluation_pool.map(lambda x: curvature_at(graph, x, n, forms[x]), graph.vertices)
    global_k = min(r.optimal_k for r in results)
    logger.debug("Global curvature", n=n, k=global_k)
    return CurvatureReport(dimension=n, results=results, global_k=global_k)


def holds_globally(
    graph: Graph,
    k: float,
    n: Union[Dimension, str, float],
    forms: Optional[Dict[str, LocalForms]] = None,
) -> bool:
    n = Dimension.parse(n)
    forms = forms if forms is not None else all_local_forms(graph)
    return all(cd_check(graph, x, k, n, forms[x]).holds for x in graph.vertices)


def minimal_dimension(graph: Graph, k: float = 0.0, tol: float = 1e-3, cap: float = 1e12) -> float:
    """Smallest n (upper end of the final bracket, width <= tol) with CD(k, n) holding at every vertex.

    Returns inf when no finite n up to ``cap`` works.
    """
    if tol <= 0:
        raise InvalidArgumentError("tolerance must be positive")
    forms = all_local_forms(graph)
    if not holds_globally(graph, k, Dimension.parse("inf"), forms):
        raise InvalidArgumentError(f"CD({k}, inf) fails, so no dimension works")

    hi = 1.0
    while not holds_globally(graph, k, hi, forms):
        hi *= 2.0
        if hi > cap:
            logger.warning("No finite dimension satisfies CD(k, n)", k=k, cap=cap)
            return math.inf
    lo = hi / 2.0 if hi > 1.0 else 0.0

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid > 0 and holds_globally(graph, k, mid, forms):
            hi = mid
        else:
            lo = mid
    return hi
