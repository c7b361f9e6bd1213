import sys
from pathlib import Path

# Add the root directory and this directory to Python path
root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from core.models import SolverConfig
from support import cycle, g_eps, remark_graph, two_vertex


@pytest.fixture
def remark():
    return remark_graph()


@pytest.fixture
def k2():
    return two_vertex()


@pytest.fixture(params=[1.0, 0.1, 0.01], ids=lambda eps: f"eps={eps}")
def geps(request):
    return g_eps(request.param)


@pytest.fixture
def geps1():
    return g_eps(1.0)


@pytest.fixture
def cycle12():
    return cycle(12)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cfg():
    return SolverConfig.from_settings()
