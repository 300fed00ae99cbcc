"""
Closed-form constants of the first two reduction steps.

Everything here is explicit in the Fourier coefficients of the forcing f and
is used to cross-check the numerical iteration.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ConsistencyError, ResonanceError
from .quadham import LANDAU_CLASS, FULL_CLASS, Monomial, QuadHamiltonian
from .trigpoly import TrigPoly, evaluate_grid, l1

logger = logging.getLogger(__name__)

RESONANCE_FLOOR = 1e-8
CROSS_CHECK_TOL = 1e-10

Frequency = Union[float, Sequence[float]]

XI1_SQ = Monomial((2, 0), (0, 0))
ETA1_SQ = Monomial((0, 0), (2, 0))
XI1_ETA1 = Monomial((1, 0), (1, 0))
XI1_XI2 = Monomial((1, 1), (0, 0))
XI2_ETA1 = Monomial((0, 1), (1, 0))
ETA1_ETA2 = Monomial((0, 0), (1, 1))


def _frequency(omega: Frequency, dim: int) -> np.ndarray:
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if omega.shape != (dim,):
        raise ValueError(f"omega of shape {omega.shape} does not match forcing dimension {dim}")
    return omega


def _check_divisor(value: float, k: Sequence[int], label: str) -> None:
    threshold = RESONANCE_FLOOR * (1 + l1(k))
    if abs(value) < threshold:
        raise ResonanceError(
            f"divisor {label} = {value:.3e} at k={tuple(k)} below {threshold:.1e}",
            mode=tuple(k), monomial=label, divisor=value, threshold=threshold,
        )


def _pairs(f: TrigPoly, omega: np.ndarray):
    """(k, omega.k, f(k) f(-k)) over the nonzero modes of f"""
    for k, value in f.coeffs.items():
        if not any(k):
            continue
        partner = f.coeff(tuple(-x for x in k))
        yield k, float(np.dot(omega, k)), value * partner


def _validate(f: TrigPoly, B0: float) -> None:
    if B0 <= 0:
        raise ValueError(f"B0 must be positive, got {B0}")
    if abs(f.mean()) > 1e-14:
        raise ValueError(f"forcing must have zero mean, got f(0) = {f.mean()}")


def _companion(f: TrigPoly, omega: np.ndarray, shift: float, scale: float, label: str) -> TrigPoly:
    """scale (omega.k / (omega.k + shift)) f(k); its mean square pairs the k and -k divisors"""
    coeffs = {}
    for k, value in f.coeffs.items():
        wk = float(np.dot(omega, k))
        _check_divisor(wk + shift, k, label)
        coeffs[k] = scale * wk / (wk + shift) * value
    return TrigPoly(f.dim, coeffs, f.cutoff, f.strip_width)


def g_omega(f: TrigPoly, omega: Frequency, B0: float) -> TrigPoly:
    """g(k) = -(1/sqrt(2 B0)) (omega.k / (omega.k + 2 B0)) f(k), k != 0"""
    _validate(f, B0)
    omega = _frequency(omega, f.dim)
    return _companion(f, omega, 2.0 * B0, -1.0 / np.sqrt(2.0 * B0), "omega.k + 2 B0")


def a_series(f: TrigPoly, omega: Frequency, B0: float) -> TrigPoly:
    """s(k) = (1/sqrt(B0)) (omega.k / (omega.k + 4 B0)) f(k), with <s^2> = a_omega"""
    _validate(f, B0)
    omega = _frequency(omega, f.dim)
    return _companion(f, omega, 4.0 * B0, 1.0 / np.sqrt(B0), "omega.k + 4 B0")


def _mean_square(g: TrigPoly) -> complex:
    """<g^2> by quadrature on a grid that integrates g^2 exactly"""
    samples = evaluate_grid(g, 2 * (2 * g.cutoff) + 1)
    return complex(np.mean(samples * samples))


def _cross_check(name: str, closed: float, quadrature: complex) -> None:
    scale = max(1.0, abs(closed))
    if abs(closed - quadrature.real) > CROSS_CHECK_TOL * scale or abs(quadrature.imag) > CROSS_CHECK_TOL * scale:
        raise ConsistencyError(
            f"{name}: closed form {closed:.15g} disagrees with quadrature {quadrature:.15g}"
        )


def _cyclotron_sum(f: TrigPoly, omega: np.ndarray, B0: float, resonance: float) -> float:
    total = 0j
    for k, wk, weight in _pairs(f, omega):
        denominator = wk * wk - resonance * resonance
        _check_divisor(denominator, k, f"(omega.k)^2 - {resonance:g}^2")
        total += weight * wk * wk / denominator
    return total.real


def c_omega(f: TrigPoly, omega: Frequency, B0: float) -> float:
    """
    Drift constant of the Landau gauge.

    c = -(1/2B0) sum_k f(k) f(-k) (omega.k)^2 / ((omega.k)^2 - 4 B0^2),
    cross-checked against -<g_omega^2>.
    """
    _validate(f, B0)
    omega = _frequency(omega, f.dim)
    closed = -_cyclotron_sum(f, omega, B0, 2.0 * B0) / (2.0 * B0)
    _cross_check("c_omega", closed, -_mean_square(g_omega(f, omega, B0)))
    return closed


def d_omega(f: TrigPoly, omega: Frequency, B0: float) -> float:
    """
    Second-order shift of the symmetric-gauge frequencies.

    d = (1/2B0) sum_k f(k) f(-k) (omega.k)^2 / ((omega.k)^2 - 4 B0^2) = <g_omega^2>.
    """
    _validate(f, B0)
    omega = _frequency(omega, f.dim)
    closed = _cyclotron_sum(f, omega, B0, 2.0 * B0) / (2.0 * B0)
    _cross_check("d_omega", closed, _mean_square(g_omega(f, omega, B0)))
    return closed


def d_omega_printed(f: TrigPoly, omega: Frequency, B0: float) -> float:
    """(1/4B0) sum f(k) f(-k) ((omega.k)^2 + 4B0^2) / ((omega.k)^2 - 4B0^2); not used downstream"""
    _validate(f, B0)
    omega = _frequency(omega, f.dim)
    total = 0j
    for k, wk, weight in _pairs(f, omega):
        denominator = wk * wk - 4.0 * B0 * B0
        _check_divisor(denominator, k, "(omega.k)^2 - 4 B0^2")
        total += weight * (wk * wk + 4.0 * B0 * B0) / denominator
    return total.real / (4.0 * B0)


def a_omega(f: TrigPoly, omega: Frequency, B0: float) -> float:
    """
    Second-order shift of nu1 in the Landau gauge.

    a = (1/B0) sum_k f(k) f(-k) (omega.k)^2 / ((omega.k)^2 - 16 B0^2) = <s^2> with s = a_series.
    """
    _validate(f, B0)
    omega = _frequency(omega, f.dim)
    closed = _cyclotron_sum(f, omega, B0, 4.0 * B0) / B0
    _cross_check("a_omega", closed, _mean_square(a_series(f, omega, B0)))
    return closed


def _series(f: TrigPoly, omega: np.ndarray, weight) -> TrigPoly:
    coeffs = {}
    for k, value in f.coeffs.items():
        wk = float(np.dot(omega, k))
        coeffs[k] = weight(wk, k) * value
    return TrigPoly(f.dim, coeffs, f.cutoff, f.strip_width)


def _shifted(shift: float, label: str):
    def weight(wk: float, k) -> float:
        _check_divisor(wk + shift, k, label)
        return 1.0 / (wk + shift)
    return weight


def chi1_landau(f: TrigPoly, omega: Frequency, B0: float, epsilon: float) -> QuadHamiltonian:
    """First-step generator of the Landau gauge (ambio chart); solves {chi, h0 + omega.I} + r1 = 0"""
    _validate(f, B0)
    omega = _frequency(omega, f.dim)
    i_eps = 1j * epsilon
    terms = {
        XI1_SQ: _series(f, omega, _shifted(4.0 * B0, "omega.k + 4 B0")).scale(i_eps),
        ETA1_SQ: _series(f, omega, _shifted(-4.0 * B0, "omega.k - 4 B0")).scale(i_eps),
        XI1_ETA1: _series(f, omega, _shifted(0.0, "omega.k")).scale(2.0 * i_eps),
        XI1_XI2: _series(f, omega, _shifted(2.0 * B0, "omega.k + 2 B0")).scale(epsilon),
        XI2_ETA1: _series(f, omega, _shifted(-2.0 * B0, "omega.k - 2 B0")).scale(epsilon),
    }
    return QuadHamiltonian(terms, LANDAU_CLASS, f.dim)


def chi1_symmetric(f: TrigPoly, omega: Frequency, B0: float, epsilon: float) -> QuadHamiltonian:
    """First-step generator of the symmetric gauge; solves {chi, h0 + omega.I} + r1 = 0"""
    _validate(f, B0)
    omega = _frequency(omega, f.dim)
    i_eps = 1j * epsilon
    terms = {
        XI1_XI2: _series(f, omega, _shifted(2.0 * B0, "omega.k + 2 B0")).scale(-i_eps),
        ETA1_ETA2: _series(f, omega, _shifted(-2.0 * B0, "omega.k - 2 B0")).scale(-i_eps),
        XI1_ETA1: _series(f, omega, _shifted(0.0, "omega.k")).scale(2.0 * i_eps),
    }
    return QuadHamiltonian(terms, FULL_CLASS, f.dim)


@dataclass(frozen=True)
class StepConstants:
    c_omega: float
    d_omega: float
    a_omega: float
    B0: float
    omega: tuple

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def step_constants(f: TrigPoly, omega: Frequency, B0: float) -> StepConstants:
    frequency = _frequency(omega, f.dim)
    return StepConstants(
        c_omega=c_omega(f, frequency, B0),
        d_omega=d_omega(f, frequency, B0),
        a_omega=a_omega(f, frequency, B0),
        B0=B0,
        omega=tuple(float(w) for w in frequency),
    )


def constants_table(f: TrigPoly, omegas: Iterable[Frequency], B0: float) -> pd.DataFrame:
    """One row per frequency: omega, B0, c_omega, d_omega, a_omega, status"""
    rows: List[Dict[str, object]] = []
    for omega in omegas:
        frequency = _frequency(omega, f.dim)
        label = float(frequency[0]) if f.dim == 1 else " ".join(f"{w:.12g}" for w in frequency)
        try:
            constants = step_constants(f, frequency, B0)
            rows.append({
                "omega": label, "B0": B0, "c_omega": constants.c_omega,
                "d_omega": constants.d_omega, "a_omega": constants.a_omega, "status": "ok",
            })
        except ResonanceError as e:
            logger.warning(f"omega={label} is resonant: {e}")
            rows.append({
                "omega": label, "B0": B0, "c_omega": np.nan,
                "d_omega": np.nan, "a_omega": np.nan, "status": "resonant",
            })
    return pd.DataFrame(rows, columns=["omega", "B0", "c_omega", "d_omega", "a_omega", "status"])
