import math

import numpy as np
import pytest

from landau_kam.errors import GridResolutionError, StripError
from landau_kam.trigpoly import (
    TrigPoly,
    evaluate,
    evaluate_along,
    evaluate_grid,
    fourier_analyze,
    grid_points,
    product,
    strip_norm,
    truncate,
)
from tests.conftest import random_poly


def test_sine_coefficients_and_values(sine):
    assert sine.coeff((1,)) == pytest.approx(-0.5j)
    assert sine.coeff((-1,)) == pytest.approx(0.5j)
    assert sine.mean() == 0
    assert sine.is_real_valued()
    assert evaluate(sine, math.pi / 2) == pytest.approx(1.0)
    assert evaluate(sine, 0.3) == pytest.approx(math.sin(0.3))


def test_strip_norm_of_sine_is_e(sine):
    assert strip_norm(sine, 1.0) == pytest.approx(math.e)
    assert strip_norm(sine, 0.0) == pytest.approx(1.0)


def test_strip_norm_beyond_strip_raises(sine):
    with pytest.raises(StripError):
        strip_norm(sine, 1.5)


def test_evaluate_inside_and_outside_strip(sine):
    value = evaluate(sine, 0.2 + 0.9j)
    assert value == pytest.approx(np.sin(0.2 + 0.9j))
    with pytest.raises(StripError):
        evaluate(sine, 0.2 + 1.2j)
    with pytest.raises(ValueError):
        evaluate(sine, 0.2 + 1.2j)


def test_product_sine_squared(sine):
    square = product(sine, sine)
    assert square.coeff((0,)) == pytest.approx(0.5)
    assert square.coeff((2,)) == pytest.approx(-0.25)
    assert square.coeff((-2,)) == pytest.approx(-0.25)
    assert square.coeff((1,)) == 0
    assert square.cutoff == 2
    assert square.is_real_valued()


def test_product_matches_pointwise_values_on_two_torus(rng):
    p = random_poly(rng, 2, 3)
    q = random_poly(rng, 2, 2)
    pq = p * q
    for theta in rng.uniform(0, 2 * math.pi, size=(5, 2)):
        assert evaluate(pq, theta) == pytest.approx(evaluate(p, theta) * evaluate(q, theta), abs=1e-10)


def test_fourier_analyze_recovers_trig_polynomial(rng):
    p = random_poly(rng, 1, 6, real=True)
    samples = evaluate_grid(p, 17).real
    recovered = fourier_analyze(samples, 6)
    assert recovered.distance(p) < 1e-13
    assert recovered.real


def test_fourier_analyze_two_dimensions():
    grid = grid_points(2, 16)
    samples = np.cos(grid[..., 0] - 2 * grid[..., 1])
    p = fourier_analyze(samples, 4)
    assert p.coeff((1, -2)) == pytest.approx(0.5)
    assert p.coeff((-1, 2)) == pytest.approx(0.5)
    assert sum(abs(v) for k, v in p.coeffs.items() if k not in ((1, -2), (-1, 2))) < 1e-13


def test_fourier_analyze_needs_enough_points():
    with pytest.raises(GridResolutionError):
        fourier_analyze(np.zeros(8), 4)


def test_parseval(rng):
    p = random_poly(rng, 2, 4)
    values = evaluate_grid(p, 12)
    assert np.mean(np.abs(values) ** 2) == pytest.approx(sum(abs(v) ** 2 for v in p.coeffs.values()))


def test_truncate_splits_without_loss(rng):
    p = random_poly(rng, 1, 8)
    low, tail = truncate(p, 3)
    assert max(abs(k[0]) for k in low.modes()) <= 3
    assert min(abs(k[0]) for k in tail.modes()) > 3
    assert (low + tail).distance(p) == 0


def test_advect_differentiates_along_omega(sine):
    derivative = sine.advect([2.5])
    assert derivative.coeff((1,)) == pytest.approx(1.25)
    times = np.linspace(0.0, 3.0, 7)
    assert np.allclose(evaluate_along(derivative, [2.5], times), 2.5 * np.cos(2.5 * times))


def test_arithmetic_and_scalars(sine):
    shifted = sine + 2.0
    assert shifted.mean() == 2.0
    assert (shifted - 2.0).distance(sine) == 0
    assert (3 * sine).coeff((1,)) == pytest.approx(-1.5j)
    assert (-sine).coeff((1,)) == pytest.approx(0.5j)
    assert sine.conjugate().distance(sine) == 0


def test_dimension_mismatch_rejected(sine):
    with pytest.raises(ValueError):
        sine + TrigPoly.sine((1, 0))
    with pytest.raises(ValueError):
        TrigPoly(1, {(1, 0): 1.0})


def test_dict_round_trip_preserves_equality(rng):
    p = random_poly(rng, 2, 2)
    assert TrigPoly.from_json(p.to_json()) == p


def test_pruned_drops_small_coefficients():
    p = TrigPoly.from_modes({(0,): 1.0, (1,): 1e-16, (2,): 0.1})
    assert set(p.pruned(1e-14).modes()) == {(0,), (2,)}
