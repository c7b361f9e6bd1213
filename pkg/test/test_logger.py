import io
import logging

import numpy as np
import pytest

from core.evolution import solve
from core.models import FlowStatusKind, SolverConfig
from support import two_vertex
from utils.logger import ContextFormatter, StructuredLogger, get_logger


@pytest.fixture
def captured():
    """Stream attached to the evolution logger at DEBUG level."""
    stream = io.StringIO()
    handler = logging.StreamHandler(stream)
    handler.setFormatter(ContextFormatter("%(levelname)s %(message)s"))
    target = logging.getLogger("evolution")
    previous = target.level
    target.addHandler(handler)
    target.setLevel(logging.DEBUG)
    yield stream
    target.removeHandler(handler)
    target.setLevel(previous)


def _record(context):
    record = logging.LogRecord("x", logging.INFO, __file__, 1, "Violation", None, None)
    record.context = context
    return record


def test_formatter_appends_sorted_context():
    text = ContextFormatter("%(message)s").format(_record({"vertex": "2", "margin": 0.5}))
    assert text == "Violation [margin=0.5 vertex='2']"


def test_formatter_without_context():
    assert ContextFormatter("%(message)s").format(_record({})) == "Violation"


def test_bind_merges_context():
    base = StructuredLogger("curvflow.test.bind", context={"theorem": "gradient"})
    bound = base.bind(vertex="a")
    assert bound.context == {"theorem": "gradient", "vertex": "a"}
    assert base.context == {"theorem": "gradient"}
    assert bound.logger is base.logger


def test_get_logger_reuses_handlers():
    first = get_logger("curvflow.test.handlers")
    count = len(first.logger.handlers)
    second = get_logger("curvflow.test.handlers")
    assert first.logger is second.logger
    assert count >= 1
    assert len(second.logger.handlers) == count


def test_blow_up_warning_carries_time(captured):
    cfg = SolverConfig(blowup_threshold=15.0)
    flow = solve(two_vertex(), np.array([0.0, 10.0]), 1.0, cfg)
    assert flow.status.kind == FlowStatusKind.BLEW_UP
    lines = captured.getvalue().splitlines()
    warning = next(line for line in lines if line.startswith("WARNING Flow blew up"))
    assert f"t={flow.status.t}" in warning
    assert "threshold=15.0" in warning
