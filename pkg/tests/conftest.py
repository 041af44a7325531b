import os
import tempfile

_scratch = tempfile.mkdtemp(prefix="krtv-tests-")
os.environ["LOGS_DIR"] = os.path.join(_scratch, "logs")
os.environ["RUNS_DATABASE_URL"] = f"sqlite:///{os.path.join(_scratch, 'runs.db')}"

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from schemas import SolverConfig  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tight_cfg():
    return SolverConfig(gap_tol=1e-10, max_iters=200000, check_every=50)
