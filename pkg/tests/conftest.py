import pytest

from horolab import FiniteMetricSpace, FiniteMetricTree, HyperbolicHalfPlane, LpSpace, OpenConeSpace


@pytest.fixture(scope="session")
def l1():
    return LpSpace(2, 1.0)


@pytest.fixture(scope="session")
def l2():
    return LpSpace(2, 2.0)


@pytest.fixture(scope="session")
def linf():
    return LpSpace(2, float("inf"))


@pytest.fixture(scope="session")
def halfplane():
    return HyperbolicHalfPlane()


@pytest.fixture(scope="session")
def small_tree():
    # o --3-- a --4-- b ; a --2-- c ; o --1.5-- d
    edges = [("o", "a", 3.0), ("a", "b", 4.0), ("a", "c", 2.0), ("o", "d", 1.5)]
    return FiniteMetricTree(edges, "o")


@pytest.fixture(scope="session")
def spider():
    return FiniteMetricTree.spider(legs=3, length=100)


@pytest.fixture(scope="session")
def two_point_cone():
    return OpenConeSpace(FiniteMetricSpace.two_point())


@pytest.fixture(scope="session")
def path_cone():
    return OpenConeSpace(FiniteMetricSpace.path(8, 0.125))
