import numpy as np
import pytest

from zetavac import hydrogen_matrix, vacuum_state


@pytest.fixture(scope="session")
def hydrogen_vacuum():
    """Memoized hydrogen ground states; several suites share the big ones."""
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = vacuum_state(hydrogen_matrix(n))
        return cache[n]

    return get


def random_hermitian(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (M + M.conj().T) / 2.0
