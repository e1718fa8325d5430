import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "accucore",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("accucore")

RTOL = 1e-8
ATOL = 1e-12


def rel_err(full, summary):
    full = np.atleast_1d(np.asarray(full, dtype=float))
    summary = np.atleast_1d(np.asarray(summary, dtype=float))
    return float(np.linalg.norm(full - summary) / max(np.linalg.norm(full), ATOL))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
