import json
import math

import numpy as np
import pytest
from scipy import linalg

from landau_kam.errors import DegenerateNormalFormError, GeneratorBranchError
from landau_kam.homological import DiophantineParams
from landau_kam.kam import (
    C_STAR,
    GeneratorSeries,
    KamSettings,
    ReductionState,
    Status,
    assemble_generator,
    form_norm,
    kam_reduce,
    kam_reduce_nondegenerate,
    kam_step,
    make_schedule,
    matrix_logarithm,
    reduce_symmetric,
    symmetric_second_step,
    transport,
)
from landau_kam.oracle import landau_drift_spectral
from landau_kam.quadham import E_C, LANDAU_CLASS, XI2_SQUARED, NormalForm, QuadHamiltonian, build_landau, build_symmetric
from tests.conftest import B0, LANDAU_OMEGA, SYMMETRIC_OMEGA, c_closed, d_closed


# schedule ---------------------------------------------------------------

def test_schedule_parameters():
    schedule = make_schedule(1e-2, sigma0=1.0, max_steps=6, kappa_scale=0.5)
    first = schedule.step(1)
    gap = C_STAR
    assert first.sigma == pytest.approx(1.0 - gap)
    assert first.cutoff == math.ceil(2.0 * math.log(100.0) / gap)
    assert first.kappa == pytest.approx(0.5 * 1e-2 ** 0.125)
    assert first.epsilon == pytest.approx(1e-3)
    assert schedule.step(2).epsilon_prev == first.epsilon
    sigmas = [s.sigma for s in schedule]
    assert all(a > b > 0.5 for a, b in zip(sigmas, sigmas[1:]))


def test_schedule_strips_shrink_to_half():
    schedule = make_schedule(0.5, sigma0=2.0, max_steps=60)
    assert 1.0 < schedule.steps[-1].sigma < 1.05


def test_schedule_stops_on_underflow():
    assert len(make_schedule(1e-3, max_steps=12)) == 11


@pytest.mark.parametrize("epsilon", [0.0, 1.0, -0.1])
def test_schedule_rejects_epsilon_outside_unit_interval(epsilon):
    with pytest.raises(ValueError):
        make_schedule(epsilon)


# single step ------------------------------------------------------------

def test_transport_by_zero_generator_is_identity(landau_problem):
    hamiltonian = landau_problem.hamiltonian
    image, tail = transport(hamiltonian, QuadHamiltonian(), np.array([-LANDAU_OMEGA]), 4, 17)
    assert (image - hamiltonian).max_abs() < 1e-13
    assert tail < 1e-13


def test_first_landau_step(landau_problem, settings):
    eps = landau_problem.epsilon
    step = settings.schedule(eps).step(1)
    outcome = kam_step((landau_problem.base, landau_problem.perturbation), [LANDAU_OMEGA], step, settings)
    # only <r2> reaches the normal form in the first step
    assert outcome.normal_form.drift == pytest.approx(-eps ** 2 / (4.0 * B0), rel=1e-10)
    assert outcome.perturbation.class_tag == LANDAU_CLASS
    assert outcome.diagnostics.q_norm_after < 0.1 * outcome.diagnostics.q_norm_before
    assert outcome.diagnostics.min_divisor == pytest.approx(0.4)


# Landau reduction -------------------------------------------------------

@pytest.mark.parametrize("epsilon", [1e-2, 5e-3, 2.5e-3])
def test_landau_drift_constant(sine, epsilon):
    result = kam_reduce(build_landau(B0, sine, epsilon), [LANDAU_OMEGA])
    assert result.status is Status.CONVERGED, result.message
    expected = c_closed(LANDAU_OMEGA)
    assert abs(result.normal_form.drift / epsilon ** 2 - expected) <= 5 * epsilon ** 2 * abs(expected)


def test_landau_drift_matches_spectral_solution(sine):
    epsilon = 0.05
    result = kam_reduce(build_landau(B0, sine, epsilon), [LANDAU_OMEGA])
    assert result.converged
    exact = landau_drift_spectral(B0, sine, epsilon, [LANDAU_OMEGA])
    assert result.normal_form.drift == pytest.approx(exact, rel=1e-6)


def test_landau_contraction_is_superlinear(landau_problem):
    result = kam_reduce(landau_problem, [LANDAU_OMEGA])
    assert result.converged
    norms = result.norms()
    assert len(norms) >= 3
    for earlier, later in zip(norms, norms[1:]):
        if later > 1e-11:
            assert later <= earlier ** 1.4


def test_landau_generator_is_symplectic_and_real(landau_problem):
    result = kam_reduce(landau_problem, [LANDAU_OMEGA])
    generator = result.generator
    assert generator.class_tag == LANDAU_CLASS
    assert generator.reconstruction_error < 1e-8
    a = generator.on_grid(33)
    assert np.max(np.abs(np.swapaxes(a, -1, -2) @ E_C + E_C @ a)) < 1e-8


def test_unperturbed_problem_is_trivially_reduced(sine):
    result = kam_reduce(build_landau(B0, sine, 0.0), [LANDAU_OMEGA])
    assert result.status is Status.CONVERGED
    assert result.normal_form == NormalForm("landau", 2.0 * B0)
    assert result.generator.norm() == 0.0
    assert result.diagnostics == []


def test_resonant_frequency_is_reported(sine):
    result = kam_reduce(build_landau(B0, sine, 1e-2), [2.0])
    assert result.status is Status.RESONANT
    assert result.generator is None


def test_diophantine_screen_rejects_before_iterating(sine):
    settings = KamSettings(diophantine=DiophantineParams(gamma=0.05, tau=2.0))
    result = kam_reduce(build_landau(B0, sine, 1e-2), [2.0], settings)
    assert result.status is Status.RESONANT
    assert "Diophantine" in result.message
    assert result.diagnostics == []


def test_oversized_generator_is_divergence(landau_problem):
    result = kam_reduce(landau_problem, [LANDAU_OMEGA], KamSettings(max_generator_norm=1e-6))
    assert result.status is Status.DIVERGED
    assert result.generator is None


def test_frequency_dimension_is_checked(landau_problem):
    with pytest.raises(ValueError):
        kam_reduce(landau_problem, [1.0, 2.0])


def test_result_json(landau_problem):
    result = kam_reduce(landau_problem, [LANDAU_OMEGA])
    data = json.loads(result.to_json())
    assert data["status"] == "converged"
    assert set(data["normal_form"]) == {"kind", "nu1", "c"}
    assert data["generator"]["class_tag"] == LANDAU_CLASS
    assert len(data["diagnostics"]) == len(result.diagnostics)
    assert "generator" not in result.to_dict(include_generator=False)


# symmetric reduction ----------------------------------------------------

@pytest.mark.parametrize("epsilon", [1e-2, 5e-3, 2.5e-3])
def test_symmetric_second_frequency(sine, epsilon):
    result = kam_reduce(build_symmetric(B0, sine, epsilon), [SYMMETRIC_OMEGA])
    assert result.status is Status.CONVERGED, result.message
    expected = d_closed(SYMMETRIC_OMEGA)
    assert abs(result.normal_form.nu2 / epsilon ** 2 - expected) <= 5 * epsilon ** 2 * expected


def test_symmetric_frequencies_differ_by_cyclotron(symmetric_problem):
    result = reduce_symmetric(symmetric_problem, [SYMMETRIC_OMEGA])
    assert result.converged
    assert result.normal_form.nu1 - result.normal_form.nu2 == pytest.approx(2.0 * B0, abs=1e-9)


def test_opening_steps_set_nu2(symmetric_problem, settings):
    state = symmetric_second_step(symmetric_problem, [SYMMETRIC_OMEGA], settings)
    assert state.steps_done == settings.opening_steps
    eps = symmetric_problem.epsilon
    assert state.normal_form.nu2 == pytest.approx(d_closed(SYMMETRIC_OMEGA) * eps ** 2, rel=1e-2)


def test_opening_steps_require_symmetric_problem(landau_problem):
    with pytest.raises(ValueError):
        symmetric_second_step(landau_problem, [LANDAU_OMEGA])


def test_degenerate_normal_form_is_refused(symmetric_problem, settings):
    state = ReductionState(symmetric_problem, symmetric_problem.base, symmetric_problem.perturbation,
                           settings.schedule(symmetric_problem.epsilon))
    with pytest.raises(DegenerateNormalFormError):
        kam_reduce_nondegenerate(state, [SYMMETRIC_OMEGA], settings)


def test_symmetric_resonance_is_a_status(sine):
    result = kam_reduce(build_symmetric(B0, sine, 1e-2), [2.0])
    assert result.status is Status.RESONANT


# generator assembly -----------------------------------------------------

def test_matrix_logarithm_inverts_expm(rng):
    small = 0.1 * rng.standard_normal((5, 4, 4))
    large = 1.5 * rng.standard_normal((4, 4))
    stack = linalg.expm(np.concatenate([small, large[None]]))
    logarithm = matrix_logarithm(stack)
    assert np.allclose(linalg.expm(logarithm), stack, atol=1e-10)


def test_matrix_logarithm_refuses_negative_eigenvalue():
    with pytest.raises(GeneratorBranchError):
        matrix_logarithm(np.diag([-1.0, -1.0, 1.0, 1.0])[None])


def test_single_generator_assembles_to_itself(landau_problem, settings):
    step = settings.schedule(landau_problem.epsilon).step(1)
    chi = kam_step((landau_problem.base, landau_problem.perturbation), [LANDAU_OMEGA], step, settings).chi
    series = assemble_generator([chi], 1, LANDAU_CLASS, cutoff=16)
    expected = E_C @ chi.matrix_at((0.4,))
    assert np.allclose(series.matrix_at((0.4,)), expected, atol=1e-10)


def test_empty_generator_list_is_zero():
    series = assemble_generator([], 2, LANDAU_CLASS)
    assert series.dim == 2
    assert series.norm() == 0.0
    assert isinstance(series, GeneratorSeries)


def test_form_norm_of_second_order_term(landau_problem):
    # -(eps^2 / 2B0) sin^2 = -(eps^2 / 4B0)(1 - cos 2 theta)
    r2 = QuadHamiltonian({XI2_SQUARED: landau_problem.second_order[XI2_SQUARED]}, LANDAU_CLASS)
    eps = landau_problem.epsilon
    assert form_norm(r2, 0.5) == pytest.approx(eps ** 2 / 4.0 * (1.0 + math.exp(1.0)))
