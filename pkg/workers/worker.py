import sys
from pathlib import Path

# Add the root directory to Python path
root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))

import psutil
from typing import Callable, List, Optional, Sequence, TypeVar
from concurrent.futures import ThreadPoolExecutor, as_completed
from utils.config import settings
from utils.logger import get_logger

logger = get_logger("worker")

T = TypeVar("T")
R = TypeVar("R")


class EvaluationPool:
    """Thread pool for independent evaluations (per vertex, per instance).

    Results come back in submission order, so output never depends on scheduling.
    Small batches run inline.
    """

    def __init__(self, max_workers: Optional[int] = None, threshold: Optional[int] = None):
        cpus = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
        self.max_workers = max(1, min(max_workers or settings.max_workers, cpus))
        self.threshold = threshold if threshold is not None else settings.parallel_threshold
        self.completed_tasks = 0
        self.failed_tasks = 0

    def map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        items = list(items)
        if self.max_workers == 1 or len(items) < self.threshold:
            results = []
            for item in items:
                try:
                    results.append(fn(item))
                except Exception:
                    self.failed_tasks += 1
                    raise
                self.completed_tasks += 1
            return results

        logger.debug("Evaluating", items=len(items), threads=self.max_workers)
        results: List[Optional[R]] = [None] * len(items)
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(fn, item): position for position, item in enumerate(items)}
            try:
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
                    self.completed_tasks += 1
            except Exception as e:
                self.failed_tasks += 1
                logger.error(f"Threaded evaluation error: {e}")
                for pending in futures:
                    pending.cancel()
                raise
        return results  # type: ignore[return-value]


# Global evaluation pool instance
evaluation_pool = EvaluationPool()
