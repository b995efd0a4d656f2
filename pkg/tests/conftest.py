import pytest

from rendezkit.space import build_from_matrix, build_circle_grid, build_interval_grid


@pytest.fixture(scope="session")
def two_point():
    return build_from_matrix([[0, 1], [1, 0]], label="discrete2")


@pytest.fixture(scope="session")
def euclid101():
    return build_interval_grid(0.0, 1.0, 101, "euclid")


@pytest.fixture(scope="session")
def neglog257():
    return build_interval_grid(0.0, 1.0, 257, "neglog")


@pytest.fixture(scope="session")
def neglog3():
    return build_interval_grid(0.0, 1.0, 3, "neglog")


@pytest.fixture(scope="session")
def circle4():
    return build_circle_grid(4, "chordal")
