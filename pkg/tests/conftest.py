import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nlhop import ModelParams, SolverOptions, ground_state  # noqa: E402
from nlhop import _core_py  # noqa: E402

try:
    from nlhop import _core as _core_c
except ImportError:  # extension not built
    _core_c = None

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_params():
    return ModelParams(alpha=1.0, beta=1.0, sigma=1.0, omega=-1.0)


@pytest.fixture(scope="session")
def gs_cache():
    cache = {}

    def get(p, k, **opts):
        key = (p, k, tuple(sorted(opts.items())))
        if key not in cache:
            cache[key] = ground_state(p, k, SolverOptions(**opts))
        return cache[key]

    return get


@pytest.fixture(scope="session")
def gs16(default_params, gs_cache):
    return gs_cache(default_params, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(params=["python", "cython"])
def core_module(request):
    if request.param == "python":
        return _core_py
    if _core_c is None:
        pytest.skip("compiled extension not built")
    return _core_c


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
