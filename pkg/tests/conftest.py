import numpy as np
import pytest

from boundary_pairs import pair_core as pc

ACCEPTANCE_LINES: list[str] = []


def random_graph_pairs(count: int, seed: int = 2024, max_n: int = 40, max_m: int = 10):
    """Seeded random graph models with ``n <= max_n`` and ``m <= max_m``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(3, max_n + 1))
        m = int(rng.integers(1, min(max_m, n - 1) + 1))
        out.append(pc.random_graph(n, m, rng))
    return out


def far_complex_samples(p: pc.FiniteBoundaryPair, count: int, rng, distance: float = 0.1):
    """Complex samples at distance >= ``distance`` from both spectra."""
    spectra = np.concatenate([p.neumann_spectrum, p.decomposition.dirichlet_spectrum])
    hi = float(spectra.max()) + 1.0
    zs = []
    while len(zs) < count:
        z = complex(rng.uniform(-1.0, hi), rng.uniform(-1.0, 1.0))
        if np.min(np.abs(spectra - z)) >= distance:
            zs.append(z)
    return zs


@pytest.fixture
def path3():
    return pc.graph_pair(pc.path_graph(3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
