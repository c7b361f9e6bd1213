#!/usr/bin/env python3
"""
curvflow acceptance benchmark
Runs the regression suites against the reference graphs and records wall time and memory per suite.
"""

import sys
import time
import psutil
import argparse
from pathlib import Path
from typing import Callable, Dict, List, Tuple
from dataclasses import dataclass, asdict

import numpy as np

# Add root and the test helpers to path
root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))
sys.path.insert(0, str(root_dir / "test"))

from cli.generators import cycle, g_eps, remark_graph
from core.curvature import curvature_function, minimal_dimension
from core.evolution import heat_semigroup, nonlinear_flow
from core.graph_core import reversible_measure
from core.models import VerdictStatus
from core import theorems
from infrastructure.storage import storage_manager
from support import rk4_two_vertex, two_vertex
from utils.logger import get_logger

logger = get_logger("benchmark")


@dataclass
class BenchmarkResult:
    """Outcome of one acceptance suite"""
    suite: str
    passed: bool
    instances: int
    worst_margin: float
    wall_seconds: float
    rss_delta_mb: float
    note: str = ""


class AcceptanceBenchmark:
    """Acceptance suites with timing"""

    def __init__(self, seeds: int = 100):
        self.seeds = seeds
        self.results: List[BenchmarkResult] = []
        self.process = psutil.Process()

    def measure(self, suite: str, fn: Callable[[], Tuple[bool, int, float, str]]) -> BenchmarkResult:
        start_time = time.time()
        start_memory = self.process.memory_info().rss / (1024 ** 2)
        try:
            passed, instances, worst, note = fn()
        except Exception as e:
            logger.error(f"Suite {suite} failed: {e}")
            passed, instances, worst, note = False, 0, float("nan"), str(e)
        result = BenchmarkResult(
            suite=suite,
            passed=passed,
            instances=instances,
            worst_margin=worst,
            wall_seconds=time.time() - start_time,
            rss_delta_mb=self.process.memory_info().rss / (1024 ** 2) - start_memory,
            note=note,
        )
        logger.info(f"{suite}: {'PASS' if passed else 'FAIL'} in {result.wall_seconds:.2f}s")
        self.results.append(result)
        return result

    def remark_curvature(self):
        by_vertex = curvature_function(remark_graph(), "inf").by_vertex()
        expected = {"1": 0.0, "2": -0.311738, "3": 7.5}
        error = max(abs(by_vertex[x].optimal_k - k) for x, k in expected.items())
        return error <= 1e-5, 3, -error, f"K(2, inf)={by_vertex['2'].optimal_k}"

    def g_eps_curvature(self):
        worst = min(curvature_function(g_eps(eps), 32).global_k for eps in (1.0, 0.1, 0.01))
        return worst >= 0.25 - 1e-8, 9, worst - 0.25, f"min K(x, 32)={worst}"

    def g_eps_measure(self):
        errors = []
        for eps in (1.0, 0.1, 0.01):
            m = reversible_measure(g_eps(eps)).values
            errors.append(abs(m["1"] / m["2"] / (4.0 / eps) - 1.0))
            errors.append(abs(m["2"] / m["3"] / 4.0 - 1.0))
        return max(errors) <= 1e-12, len(errors), -max(errors), ""

    def gradient_decay(self):
        # remark graph: K = 1 is a claim, not a gated hypothesis
        cases = [(remark_graph(), 1.0, False), (g_eps(1.0), 0.0, True), (cycle(8), 0.0, True)]
        worst, count, passed = float("inf"), 0, True
        for graph, K, gated in cases:
            for seed in range(self.seeds):
                u0 = theorems.admissible_initial(graph, np.random.default_rng(seed))
                verdict = theorems.verify_gradient_decay(graph, u0, K=K, gate_curvature=gated)
                passed &= verdict.holds == VerdictStatus.YES and verdict.worst_margin >= -1e-7
                worst = min(worst, verdict.worst_margin)
                count += 1
        return passed, count, worst, ""

    def li_yau(self):
        worst, count, passed, residual = float("inf"), 0, True, 0.0
        for graph, n in ((two_vertex(), 2), (g_eps(1.0), 32)):
            for seed in range(self.seeds // 2):
                u0 = theorems.admissible_initial(graph, np.random.default_rng(seed))
                verdict = theorems.verify_li_yau(graph, u0, n)
                residual = max(residual, verdict.details["identity_residual"])
                passed &= verdict.holds == VerdictStatus.YES
                worst = min(worst, verdict.worst_margin)
                count += 1
        return passed and residual <= 1e-6, count, worst, f"identity residual {residual:.3e}"

    def comparison_suites(self):
        graph = g_eps(1.0)
        worst, count, passed = float("inf"), 0, True
        for seed in range(self.seeds // 2):
            rng = np.random.default_rng(seed)
            u0 = theorems.admissible_initial(graph, rng)
            negative = theorems.admissible_initial(graph, rng, nonpositive=True)
            for verdict in (
                theorems.verify_harnack(graph, u0, 32),
                theorems.verify_hamilton(graph, negative, K=0.0),
                theorems.verify_hamilton_harnack(graph, negative),
                theorems.verify_l1_comparison(graph, u0),
                theorems.verify_semigroup_comparison(graph, u0),
            ):
                passed &= verdict.holds == VerdictStatus.YES
                worst = min(worst, verdict.worst_margin)
                count += 1
        return passed, count, worst, ""

    def volume_doubling(self):
        graph = cycle(400)
        n = minimal_dimension(graph, 0.0, tol=1e-3)
        verdict = theorems.verify_volume_doubling(graph, n)
        return verdict.holds == VerdictStatus.YES, verdict.instances, verdict.worst_margin, f"n={n}"

    def oracles(self):
        graph = two_vertex()
        flow = nonlinear_flow(graph, np.array([0.0, 0.5]), 1.0).state.to_array(graph)
        flow_error = float(np.max(np.abs(flow - np.array(rk4_two_vertex((0.0, 0.5), 1.0, 1e-6)))))
        heat = heat_semigroup(graph, np.array([1.0, 0.0]), 1.0)
        kernel = np.array([0.5 + 0.5 * np.exp(-2.0), 0.5 - 0.5 * np.exp(-2.0)])
        heat_error = float(np.max(np.abs(heat - kernel)))
        passed = flow_error <= 1e-7 and heat_error <= 1e-9
        return passed, 2, -max(flow_error, heat_error), f"flow {flow_error:.2e}, heat {heat_error:.2e}"

    def run(self) -> List[BenchmarkResult]:
        suites: Dict[str, Callable] = {
            "remark-curvature": self.remark_curvature,
            "g-eps-curvature": self.g_eps_curvature,
            "g-eps-measure": self.g_eps_measure,
            "gradient-decay": self.gradient_decay,
            "li-yau": self.li_yau,
            "comparisons": self.comparison_suites,
            "volume-doubling": self.volume_doubling,
            "oracles": self.oracles,
        }
        for name, fn in suites.items():
            self.measure(name, fn)
        return self.results


def main():
    parser = argparse.ArgumentParser(description="Run the curvflow acceptance suites")
    parser.add_argument("--seeds", type=int, default=100, help="Seeded instances per suite")
    parser.add_argument("-o", "--output", default="benchmark_results.json", help="JSON report path")
    args = parser.parse_args()

    benchmark = AcceptanceBenchmark(seeds=args.seeds)
    results = benchmark.run()
    report = {
        "system": {
            "cpu_count": psutil.cpu_count(),
            "memory_total_gb": psutil.virtual_memory().total / (1024 ** 3),
        },
        "results": [asdict(r) for r in results],
        "passed": all(r.passed for r in results),
    }
    storage_manager.write_json(report, args.output)

    for r in results:
        print(f"{r.suite:<18} {'PASS' if r.passed else 'FAIL':<5} {r.instances:>5} instances  {r.wall_seconds:7.2f}s")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
