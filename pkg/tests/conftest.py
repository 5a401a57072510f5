import numpy as np
import pytest


@pytest.fixture(autouse=True)
def _seed_free_numpy_state():
    # Tests draw through explicit generators; guard against accidental use of
    # the global numpy state leaking between tests.
    state = np.random.get_state()
    yield
    np.random.set_state(state)
