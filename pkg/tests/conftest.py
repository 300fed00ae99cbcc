"""Shared fixtures: f = sin at B0 = 1, the frequencies used across the suite"""

import numpy as np
import pytest

from landau_kam.kam import KamSettings
from landau_kam.quadham import build_landau, build_symmetric
from landau_kam.trigpoly import TrigPoly, modes_within

B0 = 1.0
LANDAU_OMEGA = 2.4
SYMMETRIC_OMEGA = 3.0


def c_closed(omega: float) -> float:
    """c_omega for f = sin, B0 = 1"""
    return -omega ** 2 / (4.0 * (omega ** 2 - 4.0))


def d_closed(omega: float) -> float:
    """d_omega for f = sin, B0 = 1"""
    return omega ** 2 / (4.0 * (omega ** 2 - 4.0))


@pytest.fixture
def sine():
    return TrigPoly.sine()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def settings():
    return KamSettings()


@pytest.fixture
def landau_problem(sine):
    return build_landau(B0, sine, 1e-2)


@pytest.fixture
def symmetric_problem(sine):
    return build_symmetric(B0, sine, 1e-2)


def random_poly(rng: np.random.Generator, dim: int, cutoff: int, real: bool = False) -> TrigPoly:
    coeffs = {k: complex(rng.standard_normal(), rng.standard_normal()) for k in modes_within(dim, cutoff)}
    poly = TrigPoly(dim, coeffs, cutoff)
    return poly.real_part() if real else poly
