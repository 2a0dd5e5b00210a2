"""Shared fixtures: the standard desk-scale test fans and divisor data."""

import pytest

from toriccharge.fan import StackyFan, divisor_data


def make_p1() -> StackyFan:
    return StackyFan.make(n=1, rays=[[1], [-1]], max_cones=[[0], [1]])


def make_p12() -> StackyFan:
    # Weighted projective line P(1,2): the second ray generator is doubled,
    # giving a Z/2 orbifold point.
    return StackyFan.make(n=1, rays=[[1], [-2]], max_cones=[[0], [1]])


def make_p13() -> StackyFan:
    return StackyFan.make(n=1, rays=[[1], [-3]], max_cones=[[0], [1]])


def make_p2() -> StackyFan:
    return StackyFan.make(
        n=2,
        rays=[[1, 0], [0, 1], [-1, -1]],
        max_cones=[[0, 1], [1, 2], [0, 2]],
    )


def make_f1() -> StackyFan:
    return StackyFan.make(
        n=2,
        rays=[[1, 0], [0, 1], [-1, 1], [0, -1]],
        max_cones=[[0, 1], [1, 2], [2, 3], [3, 0]],
    )


def make_f3() -> StackyFan:
    return StackyFan.make(
        n=2,
        rays=[[1, 0], [0, 1], [-1, 3], [0, -1]],
        max_cones=[[0, 1], [1, 2], [2, 3], [3, 0]],
    )


P1_BASIS = [[1, 1]]
P12_BASIS = [[2, 1]]
P13_BASIS = [[3, 1]]
P2_BASIS = [[1, 1, 1]]
# For F1 the raw kernel basis fails the nef condition on e_a^vee; this
# adapted basis has both duals inside the extended nef cone.
F1_BASIS = [[1, -1, 1, 0], [0, 1, 0, 1]]
F3_BASIS = [[1, -3, 1, 0], [0, 1, 0, 1]]


@pytest.fixture(scope="session")
def p1():
    return make_p1()


@pytest.fixture(scope="session")
def p1_dd(p1):
    return divisor_data(p1, P1_BASIS)


@pytest.fixture(scope="session")
def p12():
    return make_p12()


@pytest.fixture(scope="session")
def p12_dd(p12):
    return divisor_data(p12, P12_BASIS)


@pytest.fixture(scope="session")
def p13_dd():
    return divisor_data(make_p13(), P13_BASIS)


@pytest.fixture(scope="session")
def p2():
    return make_p2()


@pytest.fixture(scope="session")
def p2_dd(p2):
    return divisor_data(p2, P2_BASIS)


@pytest.fixture(scope="session")
def f1_dd():
    return divisor_data(make_f1(), F1_BASIS)
