import math

import numpy as np
import pytest

import landau_kam.constants as constants
from landau_kam.constants import (
    a_omega,
    a_series,
    c_omega,
    chi1_landau,
    chi1_symmetric,
    constants_table,
    d_omega,
    d_omega_printed,
    g_omega,
    step_constants,
)
from landau_kam.errors import ConsistencyError, ResonanceError
from landau_kam.homological import solve_homological
from landau_kam.quadham import XI1_ETA1, XI2_ETA2, XI2_SQUARED, build_landau, build_symmetric, poisson_bracket
from landau_kam.trigpoly import TrigPoly, evaluate_grid
from tests.conftest import B0, c_closed, d_closed


@pytest.mark.parametrize("omega", [1.0, 2.4, 3.0, 5.0])
def test_c_and_d_closed_forms_for_sine(sine, omega):
    assert c_omega(sine, omega, B0) == pytest.approx(c_closed(omega), rel=1e-12)
    assert d_omega(sine, omega, B0) == pytest.approx(d_closed(omega), rel=1e-12)


def test_reference_values(sine):
    assert c_omega(sine, 2.4, B0) == pytest.approx(-0.8181818181818, rel=1e-10)
    assert d_omega(sine, 3.0, B0) == pytest.approx(0.45, rel=1e-12)
    assert a_omega(sine, 1.0, B0) == pytest.approx(-1.0 / 30.0, rel=1e-12)


def test_g_omega_coefficient(sine):
    g = g_omega(sine, 1.0, B0)
    assert g.coeff((1,)) == pytest.approx(1j / (6.0 * math.sqrt(2.0)))


def test_c_is_minus_d(sine):
    for omega in (0.7, 1.9, 4.2):
        assert c_omega(sine, omega, B0) == pytest.approx(-d_omega(sine, omega, B0))


def test_printed_d_differs_from_mean_square(sine):
    assert d_omega_printed(sine, 3.0, B0) == pytest.approx((9.0 + 4.0) / (8.0 * 5.0))
    assert d_omega_printed(sine, 3.0, B0) != pytest.approx(d_omega(sine, 3.0, B0))


def test_cyclotron_resonance_raises(sine):
    with pytest.raises(ResonanceError) as info:
        c_omega(sine, 2.0, B0)
    assert info.value.mode is not None
    with pytest.raises(ResonanceError):
        a_omega(sine, 4.0, B0)


def test_zero_forcing_gives_zero_constants():
    zero = TrigPoly.zero()
    assert c_omega(zero, 1.0, B0) == 0.0
    assert d_omega(zero, 1.0, B0) == 0.0
    assert a_omega(zero, 1.0, B0) == 0.0


def test_forcing_with_mean_is_rejected():
    with pytest.raises(ValueError):
        c_omega(TrigPoly.constant(1.0) + TrigPoly.sine(), 1.0, B0)


def test_two_frequency_forcing_matches_quadrature():
    forcing = TrigPoly.sine((1, 0)) + TrigPoly.cosine((0, 1), 0.5)
    omega = (1.0, math.sqrt(2.0))
    # cross-checked internally against -<g^2>
    value = c_omega(forcing, omega, B0)
    expected = c_closed(1.0) + 0.25 * c_closed(math.sqrt(2.0))
    assert value == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("omega", [1.0, 2.4, 3.0])
def test_generic_solver_reproduces_landau_chi1(sine, omega):
    problem = build_landau(B0, sine, 0.01)
    solution = solve_homological(problem.base, [omega], problem.first_order, kappa=1e-12, K=4)
    closed = chi1_landau(sine, omega, B0, 0.01)
    assert set(solution.chi.terms) == set(closed.terms)
    assert (solution.chi - closed).max_abs() < 1e-12
    assert solution.average.is_zero()


@pytest.mark.parametrize("omega", [1.0, 2.4, 3.0])
def test_generic_solver_reproduces_symmetric_chi1(sine, omega):
    problem = build_symmetric(B0, sine, 0.01)
    solution = solve_homological(problem.base, [omega], problem.first_order, kappa=1e-12, K=4)
    closed = chi1_symmetric(sine, omega, B0, 0.01)
    assert (solution.chi - closed).max_abs() < 1e-12


def test_step_constants_serialises(sine):
    constants = step_constants(sine, 3.0, B0)
    data = constants.to_dict()
    assert data["d_omega"] == pytest.approx(0.45)
    assert data["omega"] == (3.0,)


def test_constants_table_flags_resonant_rows(sine):
    table = constants_table(sine, [1.0, 2.0, 2.4, 3.0], B0)
    assert list(table.columns) == ["omega", "B0", "c_omega", "d_omega", "a_omega", "status"]
    assert list(table["status"]) == ["ok", "resonant", "ok", "ok"]
    assert np.isnan(table.loc[1, "c_omega"])
    assert table.loc[2, "c_omega"] == pytest.approx(c_closed(2.4))


@pytest.mark.parametrize("omega", [1.0, 2.4, 3.0])
def test_landau_second_order_average(sine, omega):
    epsilon = 0.01
    problem = build_landau(B0, sine, epsilon)
    chi = chi1_landau(sine, omega, B0, epsilon)
    second = problem.second_order + poisson_bracket(chi, problem.first_order).scale(0.5)
    assert second.coefficient(XI2_SQUARED) == pytest.approx(c_omega(sine, omega, B0) * epsilon ** 2, rel=1e-9)
    assert second.coefficient(XI1_ETA1) == pytest.approx(a_omega(sine, omega, B0) * epsilon ** 2, rel=1e-9)


@pytest.mark.parametrize("omega", [1.0, 2.4, 3.0])
def test_symmetric_second_order_average(sine, omega):
    epsilon = 0.01
    problem = build_symmetric(B0, sine, epsilon)
    chi = chi1_symmetric(sine, omega, B0, epsilon)
    second = problem.second_order + poisson_bracket(chi, problem.first_order).scale(0.5)
    shift = d_omega(sine, omega, B0) * epsilon ** 2
    assert second.coefficient(XI2_ETA2) == pytest.approx(shift, rel=1e-9)
    assert second.coefficient(XI1_ETA1) == pytest.approx(shift, rel=1e-9)


@pytest.mark.parametrize("constant", [c_omega, d_omega, a_omega])
def test_constants_are_even_in_omega(sine, constant):
    for omega in (0.7, 2.4, 3.0):
        assert constant(sine, -omega, B0) == pytest.approx(constant(sine, omega, B0), rel=1e-12)


def test_a_omega_matches_mean_square(sine):
    for omega in (1.0, 2.4, 5.0):
        series = a_series(sine, omega, B0)
        assert np.mean(evaluate_grid(series, 9) ** 2).real == pytest.approx(a_omega(sine, omega, B0), rel=1e-12)


def test_a_omega_cross_check_failure_raises(sine, monkeypatch):
    monkeypatch.setattr(constants, "_mean_square", lambda g: complex(1.0))
    with pytest.raises(ConsistencyError):
        a_omega(sine, 1.0, B0)
