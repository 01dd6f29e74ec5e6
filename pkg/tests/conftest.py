import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Simulation-backed properties routinely exceed hypothesis' default deadline.
settings.register_profile(
    "sim",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    max_examples=25,
)
settings.load_profile("sim")


@pytest.fixture(scope="session")
def fixtures_dir(tmp_path_factory):
    from pathlib import Path

    return Path(__file__).parent / "fixtures"


def random_graph_arrays(n, density, seed, weights=(-1.0, 1.0)):
    """Random undirected graph edge arrays used across test modules."""
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < density
    iu, iv = iu[keep], iv[keep]
    w = rng.choice(weights, size=len(iu))
    return iu.astype(np.int64), iv.astype(np.int64), w
