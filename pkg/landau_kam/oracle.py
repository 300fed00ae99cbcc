"""
Brute-force oracle
Direct integration of the cartesian flow, drift and boundedness fits, Floquet
rotation numbers, the exact Landau drift, conjugation residuals and the
Monte-Carlo measure of excluded frequencies
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, stats
from statsmodels.stats.proportion import proportion_confint

from .errors import LandauKamError, StepSizeError
from .kam import GeneratorSeries, KamResult, KamSettings, Status, exp_and_derivative, kam_reduce
from .quadham import (
    E_C,
    J_CART,
    Gauge,
    GaugeProblem,
    build_landau,
    build_problem,
    cartesian_expansion,
    chart_matrix,
    gauge_chart,
    is_matrix_real,
)
from .trigpoly import TrigPoly, evaluate_along, modes_within, product

logger = logging.getLogger(__name__)

STEP_FACTOR = 0.05
DEFECT_LIMIT = 1e-6
MIN_FIT_SAMPLES = 20
MIN_MEASURE_SAMPLES = 1000
HYPERBOLIC_TOL = 1e-6


@dataclass
class GaugeSpec:
    """Modulated field B(t) = B0 + eps f(omega t) in a given gauge"""
    gauge: Gauge
    B0: float
    forcing: TrigPoly
    epsilon: float
    omega: np.ndarray

    def __post_init__(self):
        self.omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        if self.B0 <= 0:
            raise ValueError(f"B0 must be positive, got {self.B0}")
        if self.omega.shape != (self.forcing.dim,):
            raise ValueError(f"omega of shape {self.omega.shape} does not match forcing dimension {self.forcing.dim}")

    @property
    def max_step(self) -> float:
        return STEP_FACTOR / max(2.0 * self.B0, float(np.sum(np.abs(self.omega))))

    @property
    def period(self) -> float:
        """Forcing period (single frequency only)"""
        return 2.0 * math.pi / abs(float(self.omega[0]))

    def field(self, times: np.ndarray) -> np.ndarray:
        return self.B0 + self.epsilon * evaluate_along(self.forcing, self.omega, times).real

    def problem(self) -> GaugeProblem:
        return build_problem(self.gauge, self.B0, self.forcing, self.epsilon)

    def chart(self) -> np.ndarray:
        """(z1, z2) = W (x1, x2, p1, p2)"""
        return chart_matrix(gauge_chart(self.gauge), self.B0)[:2]


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    z: np.ndarray
    symplectic_defect: float
    spec: Optional[GaugeSpec] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times,
            "x1": self.states[:, 0],
            "x2": self.states[:, 1],
            "p1": self.states[:, 2],
            "p2": self.states[:, 3],
            "abs_z1": np.abs(self.z[:, 0]),
            "abs_z2": np.abs(self.z[:, 1]),
        })

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)


@dataclass
class Monodromy:
    matrix: np.ndarray
    period: float
    defect: float


@dataclass
class DriftEstimate:
    slope: float
    stderr: float
    intercept: float
    samples: int


@dataclass
class BoundednessReport:
    sup_norm: float
    growth_exponent: float
    final_norm: float


@dataclass
class RotationReport:
    nu1: float
    nu2: float
    drift: Optional[float]
    eigenvalues: np.ndarray
    hyperbolic: bool
    method: str

    def to_dict(self) -> Dict[str, Any]:
        return {"nu1": self.nu1, "nu2": self.nu2, "drift": self.drift,
                "hyperbolic": self.hyperbolic, "method": self.method}


@dataclass
class MeasureEstimate:
    epsilon: float
    samples: int
    resonant: int
    diverged: int
    fraction: float
    ci_low: float
    ci_high: float
    statuses: List[str] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("statuses")
        return data


# integration ------------------------------------------------------------

def symplectic_defect(matrices: np.ndarray, structure: np.ndarray = J_CART) -> float:
    """max ||Phi^T J Phi - J|| over a stack of matrices"""
    gram = np.swapaxes(matrices, -1, -2) @ structure @ matrices
    return float(np.max(np.abs(gram - structure)))


def _generators(spec: GaugeSpec, times: np.ndarray) -> np.ndarray:
    """J S(t) at every requested time"""
    s0, s1, s2 = cartesian_expansion(spec.gauge, spec.B0)
    values = spec.epsilon * evaluate_along(spec.forcing, spec.omega, times).real
    matrices = s0 + np.multiply.outer(values, s1) + np.multiply.outer(values * values, s2)
    return J_CART @ matrices


def _rk4(spec: GaugeSpec, start: float, h: float, steps: int, record_every: int) -> np.ndarray:
    """Fundamental matrices at every ``record_every`` steps, starting with the identity"""
    half_times = start + 0.5 * h * np.arange(2 * steps + 1)
    generators = _generators(spec, half_times)
    phi = np.eye(4)
    records = [phi]
    for n in range(steps):
        a0, a1, a2 = generators[2 * n], generators[2 * n + 1], generators[2 * n + 2]
        k1 = a0 @ phi
        k2 = a1 @ (phi + 0.5 * h * k1)
        k3 = a1 @ (phi + 0.5 * h * k2)
        k4 = a2 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (n + 1) % record_every == 0:
            records.append(phi)
    return np.array(records)


def _check_step(spec: GaugeSpec, dt: float) -> None:
    if dt <= 0 or dt > spec.max_step * (1 + 1e-12):
        raise StepSizeError(
            f"dt = {dt:.3e} does not resolve the dynamics; need 0 < dt <= {spec.max_step:.3e}"
        )


def fundamental_matrix(spec: GaugeSpec, T: Optional[float] = None, dt: Optional[float] = None) -> Monodromy:
    """Phi(T) of the cartesian flow; T defaults to one forcing period"""
    T = spec.period if T is None else T
    dt = spec.max_step if dt is None else dt
    _check_step(spec, dt)
    steps = max(1, int(math.ceil(T / dt)))
    phi = _rk4(spec, 0.0, T / steps, steps, steps)[-1]
    return Monodromy(phi, T, symplectic_defect(phi))


def integrate_flow(
    spec: GaugeSpec,
    x0: Sequence[float],
    T: float,
    dt: Optional[float] = None,
    samples_per_period: int = 32,
) -> Trajectory:
    """
    Integrate X' = J S(omega t) X from X(0) = x0 over [0, T].

    A single frequency integrates one period and stitches powers of its
    monodromy; several frequencies are stepped directly.
    """
    dt = spec.max_step if dt is None else dt
    _check_step(spec, dt)
    x0 = np.asarray(x0, dtype=float)
    if spec.forcing.dim == 1:
        times, states, defect = _stitched(spec, x0, T, dt, samples_per_period)
    else:
        times, states, defect = _direct(spec, x0, T, dt, samples_per_period)
    if defect > DEFECT_LIMIT:
        raise StepSizeError(f"symplectic defect {defect:.3e} exceeds {DEFECT_LIMIT:g}")
    z = states @ spec.chart().T
    logger.debug(f"integrated {spec.gauge.value} flow to T={T} with {len(times)} samples, defect {defect:.2e}")
    return Trajectory(times, states, z, defect, spec)


def _stitched(spec: GaugeSpec, x0: np.ndarray, T: float, dt: float, per: int):
    period = spec.period
    substeps = int(math.ceil(period / dt / per)) * per
    h = period / substeps
    fundamentals = _rk4(spec, 0.0, h, substeps, substeps // per)
    monodromy = fundamentals[-1]
    count = int(math.floor(T / period * per + 1e-9)) + 1
    states = np.empty((count, 4))
    power = np.eye(4)
    defect = symplectic_defect(fundamentals)
    for index in range(count):
        j, l = divmod(index, per)
        if l == 0 and j > 0:
            power = monodromy @ power
            defect = max(defect, symplectic_defect(power))
        states[index] = fundamentals[l] @ (power @ x0)
    times = np.arange(count) * (period / per)
    return times, states, defect


def _direct(spec: GaugeSpec, x0: np.ndarray, T: float, dt: float, per: int):
    fastest = float(np.max(np.abs(spec.omega)))
    steps = int(math.ceil(T / dt))
    h = T / steps
    stride = max(1, int(round(2.0 * math.pi / fastest / per / h)))
    steps = int(math.ceil(steps / stride)) * stride
    fundamentals = _rk4(spec, 0.0, h, steps, stride)
    times = np.arange(len(fundamentals)) * (stride * h)
    return times, fundamentals @ x0, symplectic_defect(fundamentals)


# fits -------------------------------------------------------------------

COORDINATES = {"x1": 0, "x2": 1, "p1": 2, "p2": 3}


def drift_rate(trajectory: Trajectory, coordinate: str = "x1") -> DriftEstimate:
    """Least-squares slope of a cartesian coordinate over [T/2, T]"""
    times = trajectory.times
    window = times >= 0.5 * times[-1]
    if np.count_nonzero(window) < MIN_FIT_SAMPLES:
        raise ValueError(
            f"drift window holds {np.count_nonzero(window)} samples, need at least {MIN_FIT_SAMPLES}"
        )
    fit = stats.linregress(times[window], trajectory.states[window, COORDINATES[coordinate]])
    return DriftEstimate(float(fit.slope), float(fit.stderr), float(fit.intercept), int(np.count_nonzero(window)))


def boundedness_metric(trajectory: Trajectory) -> BoundednessReport:
    """Running sup of the chart norm and its log-log growth exponent"""
    norms = np.sqrt(np.sum(np.abs(trajectory.z) ** 2, axis=1))
    running = np.maximum.accumulate(norms)
    times = trajectory.times
    window = (times >= 0.1 * times[-1]) & (times > 0)
    if np.count_nonzero(window) < MIN_FIT_SAMPLES:
        raise ValueError(f"growth fit needs at least {MIN_FIT_SAMPLES} samples")
    fit = stats.linregress(np.log(times[window]), np.log(running[window]))
    return BoundednessReport(float(running[-1]), float(fit.slope), float(norms[-1]))


# rotation numbers -------------------------------------------------------

def _unwrap(phase: float, period: float, target: float) -> float:
    """Representative of phase/period + 2 pi n/period nearest to target"""
    step = 2.0 * math.pi / period
    base = phase / period
    return base + step * round((target - base) / step)


def rotation_numbers(spec: GaugeSpec, T: Optional[float] = None) -> RotationReport:
    """
    Normal-form frequencies seen by the flow.

    A single frequency uses the eigen-phases of the one-period monodromy in
    the gauge chart; several frequencies track the phase of z1 and z2.
    """
    if spec.forcing.dim == 1:
        return _floquet_rotation(spec)
    return _tracked_rotation(spec, T)


def _floquet_rotation(spec: GaugeSpec) -> RotationReport:
    monodromy = fundamental_matrix(spec, dt=spec.max_step / 4.0)
    period = monodromy.period
    transform = chart_matrix(gauge_chart(spec.gauge), spec.B0)
    complex_monodromy = transform @ monodromy.matrix @ np.linalg.inv(transform)
    eigenvalues, left, right = linalg.eig(complex_monodromy, left=True, right=True)
    hyperbolic = bool(np.max(np.abs(np.abs(eigenvalues) - 1.0)) > HYPERBOLIC_TOL)
    if hyperbolic:
        logger.warning(f"monodromy spectrum off the unit circle: |lambda| = {np.abs(eigenvalues)}")

    # xi(t) = e^{-i nu t} xi(0)
    first = int(np.argmax(np.abs(right[0])))
    nu1 = _unwrap(-float(np.angle(eigenvalues[first])), period, 2.0 * spec.B0)
    drift = None
    if spec.gauge is Gauge.SYMMETRIC:
        second = int(np.argmax(np.abs(right[1])))
        nu2 = _unwrap(-float(np.angle(eigenvalues[second])), period, 0.0)
    else:
        nu2 = 0.0
        drift = _jordan_drift(monodromy.matrix, eigenvalues, left, right, transform, period)
    return RotationReport(nu1, nu2, drift, eigenvalues, hyperbolic, "floquet")


def _jordan_drift(matrix: np.ndarray, eigenvalues: np.ndarray, left: np.ndarray, right: np.ndarray,
                  transform: np.ndarray, period: float) -> float:
    """x1 displacement per unit p1 and unit time from the unipotent block"""
    elliptic = np.argsort(np.abs(eigenvalues - 1.0))[-2:]
    projector = np.eye(4, dtype=complex)
    for j in elliptic:
        v, w = right[:, j], left[:, j]
        projector -= np.outer(v, w.conj()) / (w.conj() @ v)
    projector = np.linalg.inv(transform) @ projector @ transform
    secular = (matrix - np.eye(4)) @ projector
    return float(secular[COORDINATES["x1"], COORDINATES["p1"]].real / period)


def _tracked_rotation(spec: GaugeSpec, T: Optional[float]) -> RotationReport:
    fastest = float(np.max(np.abs(spec.omega)))
    T = 200.0 * 2.0 * math.pi / fastest if T is None else T
    inverse = np.linalg.inv(chart_matrix(gauge_chart(spec.gauge), spec.B0))
    frequencies = []
    for mode in range(2):
        z = np.zeros(4, dtype=complex)
        z[mode], z[mode + 2] = 1.0, 1.0
        x0 = (inverse @ z).real
        trajectory = integrate_flow(spec, x0, T)
        phase = np.unwrap(np.angle(trajectory.z[:, mode]))
        fit = stats.linregress(trajectory.times, phase)
        frequencies.append(-float(fit.slope))
    drift = None
    nu2 = frequencies[1]
    if spec.gauge is Gauge.LANDAU:
        nu2 = 0.0
        p1 = np.array([0.0, 0.0, 1.0, 0.0])
        drift = drift_rate(integrate_flow(spec, p1, T), "x1").slope
    return RotationReport(frequencies[0], nu2, drift, np.array([]), False, "phase-tracking")


# exact Landau drift -----------------------------------------------------

def landau_drift_spectral(B0: float, forcing: TrigPoly, epsilon: float, omega: Sequence[float],
                          cutoff: int = 64) -> float:
    """
    Exact drift constant c(eps) of the Landau gauge.

    With p1 conserved, x2 = p1 y where y'' + 4 B^2 y = 4 B has a quasi-periodic
    solution found by harmonic balance over |k|_1 <= cutoff; then
    <x1'> = 2 p1 (1 - <B y>) = -(4 c / B0) p1.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    field_poly = TrigPoly.constant(B0, forcing.dim, forcing.strip_width) + forcing.scale(epsilon)
    square = product(field_poly, field_poly)
    modes = list(modes_within(forcing.dim, cutoff))
    index = {k: i for i, k in enumerate(modes)}
    system = np.zeros((len(modes), len(modes)), dtype=complex)
    for i, k in enumerate(modes):
        system[i, i] -= float(np.dot(omega, k)) ** 2
        for l, value in square.coeffs.items():
            j = index.get(tuple(a - b for a, b in zip(k, l)))
            if j is not None:
                system[i, j] += 4.0 * value
    rhs = np.array([4.0 * field_poly.coeff(k) for k in modes])
    y = np.linalg.solve(system, rhs)
    mean_by = sum(field_poly.coeff(k) * y[index[tuple(-x for x in k)]]
                  for k in field_poly.modes() if tuple(-x for x in k) in index)
    return float(-0.5 * B0 * (1.0 - complex(mean_by).real))


# conjugation ------------------------------------------------------------

def conjugation_residual(problem: GaugeProblem, result: KamResult, size: int, omega: Sequence[float]) -> float:
    """
    max over a theta-grid of ||Psi^{-1}(E_C S Psi - omega.grad Psi) - E_C S_inf||
    with Psi = e^{A}.
    """
    if result.generator is None:
        raise ValueError(f"result has no generator (status {result.status.value})")
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    generator = result.generator
    size = max(size, 2 * max(generator.cutoff, problem.hamiltonian.cutoff) + 1)
    a = generator.on_grid(size)
    psi, psi_dot = exp_and_derivative(a, generator.derivative_on_grid(omega, size))
    s = problem.hamiltonian.matrices_on_grid(size)
    limit = E_C @ result.normal_form.to_hamiltonian().matrix_at((0.0,) * problem.forcing.dim)
    residual = np.linalg.solve(psi, E_C @ s @ psi - psi_dot) - limit
    return float(np.max(np.linalg.norm(residual, ord=2, axis=(-2, -1))))


def transformation_defects(generator: GeneratorSeries, size: int) -> Tuple[float, float]:
    """(symplectic defect, reality defect) of e^{A} on a theta-grid"""
    psi = linalg.expm(generator.on_grid(max(size, 2 * generator.cutoff + 1)))
    _, reality = is_matrix_real(psi, generator.class_tag)
    return symplectic_defect(psi, E_C), reality


# measure ----------------------------------------------------------------

def _classify(job: Tuple[Dict[str, Any], float, float, Tuple[float, ...], KamSettings]) -> str:
    forcing_data, B0, epsilon, omega, settings = job
    forcing = TrigPoly.from_dict(forcing_data)
    try:
        result = kam_reduce(build_landau(B0, forcing, epsilon), omega, settings)
    except LandauKamError as e:
        logger.warning(f"omega={omega}: reduction failed with {e!r}")
        return Status.DIVERGED.value
    return result.status.value


def measure_excluded(
    epsilon: float,
    B0: float,
    forcing: TrigPoly,
    samples: int,
    seed: int,
    settings: Optional[KamSettings] = None,
    jobs: int = 1,
) -> MeasureEstimate:
    """Monte-Carlo fraction of omega in (0, 2 pi]^n for which the Landau reduction is resonant"""
    if samples < MIN_MEASURE_SAMPLES:
        raise ValueError(f"need at least {MIN_MEASURE_SAMPLES} samples, got {samples}")
    settings = settings or KamSettings()
    rng = np.random.default_rng(seed)
    omegas = 2.0 * math.pi * (1.0 - rng.random((samples, forcing.dim)))
    payload = forcing.to_dict()
    work = [(payload, B0, epsilon, tuple(float(w) for w in omega), settings) for omega in omegas]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            statuses = list(pool.map(_classify, work, chunksize=max(1, samples // (4 * jobs))))
    else:
        statuses = [_classify(job) for job in work]
    resonant = statuses.count(Status.RESONANT.value)
    diverged = statuses.count(Status.DIVERGED.value)
    low, high = proportion_confint(resonant, samples, alpha=0.05, method="wilson")
    estimate = MeasureEstimate(epsilon, samples, resonant, diverged, resonant / samples,
                               float(low), float(high), statuses)
    logger.info(f"epsilon={epsilon}: excluded fraction {estimate.fraction:.4f} "
                f"[{estimate.ci_low:.4f}, {estimate.ci_high:.4f}], {diverged} diverged")
    return estimate
