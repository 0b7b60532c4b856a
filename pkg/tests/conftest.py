import pytest

from oddmf.ring import Ring


@pytest.fixture
def Qx():
    return Ring([("x", 1)])


@pytest.fixture
def kp():
    # Q<p,q>/(pq + qp)
    return Ring([("p", 1), ("q", 1)], signs={("p", "q"): -1})


@pytest.fixture
def Ba():
    # B = Q[a][y] / (y^2 - a)
    return Ring([("a", 0), ("y", 0)], rewrites={"y": "a"})
