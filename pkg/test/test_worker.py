import threading

import pytest

from workers.worker import EvaluationPool


def test_inline_below_threshold():
    pool = EvaluationPool(max_workers=4, threshold=100)
    threads = pool.map(lambda _: threading.get_ident(), range(10))
    assert set(threads) == {threading.get_ident()}
    assert pool.completed_tasks == 10


def test_threaded_results_keep_order():
    pool = EvaluationPool(max_workers=4, threshold=0)
    assert pool.map(lambda x: x * x, range(200)) == [x * x for x in range(200)]
    assert pool.completed_tasks == 200


def test_errors_propagate():
    pool = EvaluationPool(max_workers=2, threshold=0)

    def fail_on_seven(x):
        if x == 7:
            raise ValueError("seven")
        return x

    with pytest.raises(ValueError, match="seven"):
        pool.map(fail_on_seven, range(20))
    assert pool.failed_tasks == 1


def test_worker_count_is_bounded():
    assert EvaluationPool(max_workers=10_000).max_workers >= 1
    assert EvaluationPool(max_workers=1).max_workers == 1
