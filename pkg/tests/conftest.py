import numpy as np
import pytest

from sumprodlab import GridMeasure, ap_ifs, pushforward_monotone, render_measure


@pytest.fixture(scope="session")
def cantor_family():
    """Middle-half Cantor system: two maps with ratio 1/4, dimension 1/2."""
    return ap_ifs(2, "1/4")


@pytest.fixture(scope="session")
def cantor_level12(cantor_family):
    return render_measure(cantor_family, 12)


@pytest.fixture(scope="session")
def pushed_cantor_level10(cantor_family):
    m = render_measure(cantor_family, 10)
    return pushforward_monotone(m, "exp2", 10)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240809)


def random_measure(rng, level=None, max_cells=200):
    if level is None:
        level = int(rng.integers(0, 9))
    n = int(rng.integers(1, max_cells + 1))
    w = rng.random(n) + 1e-12
    return GridMeasure.from_weights(level, int(rng.integers(-40, 40)), w)
