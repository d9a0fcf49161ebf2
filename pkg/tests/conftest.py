import math

import numpy as np
import pytest

from relgkls.fockspace import FockBasis, ModeSet


def ladder_oracle(basis: FockBasis, j: int, dagger: bool = False) -> np.ndarray:
    """Ladder matrix built state by state from the occupation-vector rule."""
    p = basis.mode_set.position(j)
    D = basis.dim
    out = np.zeros((D, D))
    for col in range(D):
        occ = list(basis.occupations(col))
        n = occ[p]
        if dagger:
            if n == basis.n_max:
                continue
            occ[p] = n + 1
            out[basis.index(occ), col] = math.sqrt(n + 1)
        elif n > 0:
            occ[p] = n - 1
            out[basis.index(occ), col] = math.sqrt(n)
    return out


@pytest.fixture(scope="session")
def desk_basis():
    return FockBasis(ModeSet(2 * math.pi, 1, 1.0), 2)


@pytest.fixture(scope="session")
def single_mode_basis():
    # J = 0: one mode with k = 0 and omega = m = 1
    return FockBasis(ModeSet(2 * math.pi, 0, 1.0), 6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
