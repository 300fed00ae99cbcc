"""
KAM reducibility iteration
Schedules, single steps, the Landau and symmetric reductions and assembly of
the reducing transformation
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .errors import DegenerateNormalFormError, DivergenceError, GeneratorBranchError, ResonanceError
from .homological import DiophantineParams, DivisorReport, diophantine_check, solve_homological
from .quadham import (
    E_C,
    LANDAU_CLASS,
    POISSON,
    GaugeProblem,
    Gauge,
    NormalForm,
    QuadHamiltonian,
    advect,
    from_grid_matrices,
)
from .trigpoly import DEFAULT_STRIP_WIDTH, analyze_dense, strip_norm, synthesize_dense, truncate

logger = logging.getLogger(__name__)

C_STAR = 3.0 / math.pi ** 2
DEFAULT_MAX_STEPS = 12
DEFAULT_STOP_TOL = 1e-13
TAYLOR_RADIUS = 0.5
BRANCH_TOL = 1e-6
RECONSTRUCTION_TOL = 1e-8


class Status(Enum):
    CONVERGED = "converged"
    RESONANT = "resonant"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class ScheduleStep:
    index: int
    sigma: float
    cutoff: int
    kappa: float
    epsilon: float
    epsilon_prev: float


@dataclass(frozen=True)
class Schedule:
    epsilon: float
    sigma0: float
    kappa_scale: float
    steps: Tuple[ScheduleStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def step(self, m: int) -> ScheduleStep:
        """Step m, counted from 1"""
        return self.steps[m - 1]


def make_schedule(
    epsilon: float,
    sigma0: float = DEFAULT_STRIP_WIDTH,
    max_steps: int = DEFAULT_MAX_STEPS,
    kappa_scale: float = 1.0,
) -> Schedule:
    """
    Parameters of every step of the iteration.

    sigma_{m-1} - sigma_m = C* sigma0 / m^2 with C* = 3/pi^2, so sigma_m decreases
    to sigma0/2; K_m = ceil(2 ln(1/eps_{m-1}) / (sigma_{m-1} - sigma_m));
    kappa_m = kappa_scale eps_{m-1}^{1/8}; eps_m = eps^{(3/2)^m}. Stops early once
    eps_m underflows.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if sigma0 <= 0:
        raise ValueError(f"sigma0 must be positive, got {sigma0}")
    steps: List[ScheduleStep] = []
    sigma_prev, eps_prev = sigma0, epsilon
    tiny = np.finfo(float).tiny
    for m in range(1, max_steps + 1):
        eps_m = epsilon ** (1.5 ** m)
        if eps_m < tiny:
            logger.debug(f"schedule stops at step {m}: epsilon underflows")
            break
        gap = C_STAR * sigma0 / m ** 2
        steps.append(ScheduleStep(
            index=m,
            sigma=sigma_prev - gap,
            cutoff=int(math.ceil(2.0 / gap * math.log(1.0 / eps_prev))),
            kappa=kappa_scale * eps_prev ** 0.125,
            epsilon=eps_m,
            epsilon_prev=eps_prev,
        ))
        sigma_prev, eps_prev = sigma_prev - gap, eps_m
    return Schedule(epsilon, sigma0, kappa_scale, tuple(steps))


@dataclass(frozen=True)
class KamSettings:
    """Knobs of the iteration"""
    sigma0: float = DEFAULT_STRIP_WIDTH
    max_steps: int = DEFAULT_MAX_STEPS
    stop_tol: float = DEFAULT_STOP_TOL
    kappa_scale: float = 0.5
    max_modes: int = 16
    oversample: int = 2
    nu2_constant: float = 0.5
    nondegeneracy: float = 0.1
    patience: int = 3
    max_generator_norm: float = 10.0
    noise_floor: float = 1e-14
    opening_steps: int = 2
    diophantine: Optional[DiophantineParams] = None
    diophantine_cutoff: int = 50
    verify_homological: bool = True

    def schedule(self, epsilon: float) -> Schedule:
        return make_schedule(epsilon, self.sigma0, self.max_steps, self.kappa_scale)

    @property
    def grid_size(self) -> int:
        return 2 * self.oversample * self.max_modes + 1


@dataclass
class StepDiagnostics:
    step: int
    cutoff: int
    kappa: float
    sigma: float
    q_norm_before: float
    q_norm_after: float
    chi_norm: float
    tail_norm: float
    min_divisor: float
    nu1: float
    second: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class StepOutcome:
    normal_form: NormalForm
    perturbation: QuadHamiltonian
    chi: QuadHamiltonian
    report: DivisorReport
    diagnostics: StepDiagnostics


def form_norm(form: QuadHamiltonian, sigma: float) -> float:
    """[q]_sigma: sum over monomials of the strip norms"""
    return sum(strip_norm(p, min(sigma, p.strip_width)) for p in form.terms.values())


def exp_and_derivative(m: np.ndarray, direction: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """expm(M) and its Frechet derivative along ``direction``, batched over leading axes"""
    n = m.shape[-1]
    block = np.zeros(m.shape[:-2] + (2 * n, 2 * n), dtype=complex)
    block[..., :n, :n] = m
    block[..., n:, n:] = m
    block[..., :n, n:] = direction
    exponential = linalg.expm(block)
    return exponential[..., :n, :n], exponential[..., :n, n:]


def transport(
    hamiltonian: QuadHamiltonian,
    chi: QuadHamiltonian,
    advection: np.ndarray,
    keep: int,
    size: int,
) -> Tuple[QuadHamiltonian, float]:
    """
    Exact image of a quadratic Hamiltonian under the time-one map of chi.

    With M = P X_chi the new coordinates are y = e^{M} x, so
    P S' = e^{M} (P S) e^{-M} + (a . grad e^{M}) e^{-M}. Returns the Fourier
    analysis of S' truncated to ``keep`` and the strip-zero norm of the
    discarded tail.
    """
    dim = hamiltonian.dim
    size = max(size, 2 * max(hamiltonian.cutoff, chi.cutoff, keep) + 1)
    s = hamiltonian.matrices_on_grid(size)
    m = POISSON @ chi.matrices_on_grid(size)
    m_dot = POISSON @ advect(chi, advection).matrices_on_grid(size)
    exponential, derivative = exp_and_derivative(m, m_dot)
    inverse = linalg.expm(-m)
    transported = POISSON @ (exponential @ (POISSON @ s) @ inverse + derivative @ inverse)
    transported = 0.5 * (transported + np.swapaxes(transported, -1, -2))
    full = from_grid_matrices(transported, dim, (size - 1) // 2, hamiltonian.class_tag,
                              hamiltonian.strip_width)
    kept, tail_norm = {}, 0.0
    for monomial, poly in full.terms.items():
        low, tail = truncate(poly, keep)
        kept[monomial] = low
        tail_norm += strip_norm(tail, 0.0)
    return QuadHamiltonian(kept, hamiltonian.class_tag, dim), tail_norm


def kam_step(
    state: Tuple[NormalForm, QuadHamiltonian],
    omega: Sequence[float],
    step: ScheduleStep,
    settings: KamSettings,
    nu2_threshold: Optional[float] = None,
    sigma_prev: Optional[float] = None,
) -> StepOutcome:
    """
    One reduction step at the physical frequency omega.

    The engine advects theta with a = -omega, so its generators conjugate the
    physical flow driven at theta = omega t.
    """
    normal, q = state
    advection = -np.atleast_1d(np.asarray(omega, dtype=float))
    cutoff = min(step.cutoff, settings.max_modes)
    sigma_prev = step.sigma if sigma_prev is None else sigma_prev
    norm_before = form_norm(q, sigma_prev)
    floor = settings.noise_floor * max(1.0, normal.nu1, q.max_abs())

    solution = solve_homological(
        normal, advection, q, step.kappa, cutoff,
        nu2_threshold=nu2_threshold, presence_tol=floor, verify=settings.verify_homological,
    )
    new_normal = normal.shifted(solution.average)
    image, tail_norm = transport(
        normal.to_hamiltonian() + q, solution.chi, advection, settings.max_modes, settings.grid_size,
    )
    perturbation = (image - new_normal.to_hamiltonian()).pruned(floor)
    norm_after = form_norm(perturbation, step.sigma)
    diagnostics = StepDiagnostics(
        step=step.index,
        cutoff=cutoff,
        kappa=step.kappa,
        sigma=step.sigma,
        q_norm_before=norm_before,
        q_norm_after=norm_after,
        chi_norm=form_norm(solution.chi, step.sigma),
        tail_norm=tail_norm,
        min_divisor=solution.report.min_modulus,
        nu1=new_normal.nu1,
        second=new_normal.second,
    )
    logger.debug(
        f"step {step.index}: K={cutoff} [q] {norm_before:.3e} -> {norm_after:.3e}, "
        f"[chi] {diagnostics.chi_norm:.3e}, tail {tail_norm:.1e}"
    )
    return StepOutcome(new_normal, perturbation, solution.chi, solution.report, diagnostics)


# generator --------------------------------------------------------------

@dataclass
class GeneratorSeries:
    """
    A(theta) = sum_k A_k e^{ik.theta}, with x = e^{A(omega t)} y taking normal-form
    coordinates y to the coordinates of the problem. A^T E_C + E_C A = 0.
    """
    coefficients: np.ndarray
    dim: int
    class_tag: str
    reconstruction_error: float = 0.0

    @classmethod
    def zero(cls, dim: int = 1, class_tag: str = LANDAU_CLASS) -> "GeneratorSeries":
        return cls(np.zeros((4, 4) + (1,) * dim, dtype=complex), dim, class_tag)

    @property
    def cutoff(self) -> int:
        return (self.coefficients.shape[-1] - 1) // 2

    def matrix_at(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        ks = np.arange(-self.cutoff, self.cutoff + 1)
        phase = np.ones((2 * self.cutoff + 1,) * self.dim, dtype=complex)
        for d in range(self.dim):
            shape = [1] * self.dim
            shape[d] = -1
            phase = phase * np.exp(1j * ks * theta[d]).reshape(shape)
        return np.tensordot(self.coefficients, phase, axes=self.dim)

    def on_grid(self, size: int) -> np.ndarray:
        values = synthesize_dense(self.coefficients, self.dim, size)
        return np.moveaxis(values, (0, 1), (-2, -1))

    def derivative_on_grid(self, omega: Sequence[float], size: int) -> np.ndarray:
        """omega . grad_theta A on the grid"""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        ks = np.arange(-self.cutoff, self.cutoff + 1)
        rate = np.zeros((2 * self.cutoff + 1,) * self.dim)
        for d in range(self.dim):
            shape = [1] * self.dim
            shape[d] = -1
            rate = rate + omega[d] * ks.reshape(shape)
        values = synthesize_dense(self.coefficients * (1j * rate), self.dim, size)
        return np.moveaxis(values, (0, 1), (-2, -1))

    def norm(self) -> float:
        """sup over theta of the spectral norm of A"""
        values = self.on_grid(4 * self.cutoff + 1)
        return float(np.max(np.linalg.norm(values, ord=2, axis=(-2, -1))))

    def to_dict(self) -> Dict[str, Any]:
        entries = []
        cutoff = self.cutoff
        for index in np.ndindex(*self.coefficients.shape[2:]):
            block = self.coefficients[(slice(None), slice(None)) + index]
            if np.any(block):
                entries.append([[i - cutoff for i in index], block.real.tolist(), block.imag.tolist()])
        return {
            "dim": self.dim,
            "cutoff": cutoff,
            "class_tag": self.class_tag,
            "reconstruction_error": self.reconstruction_error,
            "coeffs": entries,
        }


def _taylor_log(matrices: np.ndarray, tol: float = 1e-18, max_terms: int = 200) -> np.ndarray:
    """log(I + X) = sum (-1)^{n+1} X^n / n for ||X|| < 1, batched"""
    identity = np.eye(matrices.shape[-1])
    x = matrices - identity
    power = np.broadcast_to(identity, matrices.shape).astype(complex)
    total = np.zeros_like(power)
    for n in range(1, max_terms + 1):
        power = power @ x
        term = power / n
        total += term if n % 2 else -term
        if np.max(np.abs(term)) < tol:
            break
    return total


def matrix_logarithm(matrices: np.ndarray) -> np.ndarray:
    """
    Principal logarithm of a stack of matrices.

    Uses the series when ||P - I|| < 1/2 and scipy's ``logm`` otherwise.
    Raises GeneratorBranchError when an eigenvalue sits near -1.
    """
    flat = matrices.reshape((-1,) + matrices.shape[-2:])
    distance = np.linalg.norm(flat - np.eye(flat.shape[-1]), ord=2, axis=(-2, -1))
    near = distance < TAYLOR_RADIUS
    result = np.empty_like(flat, dtype=complex)
    if np.any(near):
        result[near] = _taylor_log(flat[near])
    for index in np.flatnonzero(~near):
        eigenvalues = np.linalg.eigvals(flat[index])
        if np.min(np.abs(eigenvalues + 1.0)) < BRANCH_TOL:
            raise GeneratorBranchError(
                f"eigenvalue within {BRANCH_TOL:g} of -1; logarithm branch is ambiguous"
            )
        result[index] = linalg.logm(flat[index])
    return result.reshape(matrices.shape)


def assemble_generator(
    generators: Sequence[QuadHamiltonian],
    dim: int = 1,
    class_tag: str = LANDAU_CLASS,
    cutoff: int = 16,
    size: Optional[int] = None,
) -> GeneratorSeries:
    """
    Single generator A with e^{A} = e^{B_1} e^{B_2} ... e^{B_M}, B_m = E_C X_m.

    The product is formed pointwise on a theta-grid, inverted by the matrix
    logarithm and Fourier-analysed up to ``cutoff``.
    """
    if not generators:
        return GeneratorSeries.zero(dim, class_tag)
    widest = max(chi.cutoff for chi in generators)
    size = size or 4 * cutoff + 1
    size = max(size, 2 * max(widest, cutoff) + 1)
    product = None
    for chi in generators:
        factor = linalg.expm(E_C @ chi.matrices_on_grid(size))
        product = factor if product is None else product @ factor
    logarithm = matrix_logarithm(product)
    box = analyze_dense(np.moveaxis(logarithm, (-2, -1), (0, 1)), dim, cutoff)
    series = GeneratorSeries(box, dim, class_tag)
    rebuilt = linalg.expm(series.on_grid(size))
    series.reconstruction_error = float(np.max(np.abs(rebuilt - product)))
    if series.reconstruction_error > RECONSTRUCTION_TOL:
        logger.warning(f"generator reconstruction error {series.reconstruction_error:.3e}")
    return series


# reductions -------------------------------------------------------------

@dataclass
class KamResult:
    status: Status
    normal_form: NormalForm
    generator: Optional[GeneratorSeries] = None
    diagnostics: List[StepDiagnostics] = field(default_factory=list)
    generators: List[QuadHamiltonian] = field(default_factory=list)
    residual: Optional[QuadHamiltonian] = None
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def norms(self) -> List[float]:
        return [d.q_norm_after for d in self.diagnostics]

    def to_dict(self, include_generator: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "status": self.status.value,
            "normal_form": self.normal_form.to_dict(),
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }
        if include_generator and self.generator is not None:
            data["generator"] = self.generator.to_dict()
        return data

    def to_json(self, include_generator: bool = True) -> str:
        return json.dumps(self.to_dict(include_generator), indent=2)


@dataclass
class ReductionState:
    """Normal form, remaining perturbation and history part-way through a reduction"""
    problem: GaugeProblem
    normal_form: NormalForm
    perturbation: QuadHamiltonian
    schedule: Schedule
    steps_done: int = 0
    generators: List[QuadHamiltonian] = field(default_factory=list)
    diagnostics: List[StepDiagnostics] = field(default_factory=list)

    @property
    def sigma(self) -> float:
        if self.steps_done == 0:
            return self.schedule.sigma0
        return self.schedule.step(self.steps_done).sigma


def _frequency(omega: Sequence[float], dim: int) -> np.ndarray:
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if omega.shape != (dim,):
        raise ValueError(f"omega of shape {omega.shape} does not match forcing dimension {dim}")
    return omega


def _identity_result(problem: GaugeProblem, message: str) -> KamResult:
    class_tag = problem.perturbation.class_tag
    return KamResult(
        Status.CONVERGED, problem.base, GeneratorSeries.zero(problem.forcing.dim, class_tag),
        residual=problem.perturbation, message=message,
    )


def _advance(
    state: ReductionState,
    omega: np.ndarray,
    settings: KamSettings,
    last_step: int,
    nu2_threshold: Optional[float] = None,
) -> Tuple[Optional[Status], str]:
    """Run steps up to ``last_step``; returns a terminal status or None when the budget ran out"""
    norm = form_norm(state.perturbation, state.sigma)
    stalls = 0
    while state.steps_done < min(last_step, len(state.schedule)):
        if norm <= settings.stop_tol:
            return Status.CONVERGED, f"[q] = {norm:.3e} after {state.steps_done} steps"
        step = state.schedule.step(state.steps_done + 1)
        try:
            outcome = kam_step((state.normal_form, state.perturbation), omega, step, settings,
                               nu2_threshold=nu2_threshold, sigma_prev=state.sigma)
        except ResonanceError as e:
            logger.info(f"resonance at step {step.index}: {e}")
            return Status.RESONANT, str(e)
        state.steps_done += 1
        state.normal_form = outcome.normal_form
        state.perturbation = outcome.perturbation
        state.generators.append(outcome.chi)
        state.diagnostics.append(outcome.diagnostics)
        if outcome.diagnostics.chi_norm > settings.max_generator_norm:
            return Status.DIVERGED, f"generator norm {outcome.diagnostics.chi_norm:.3e} at step {step.index}"
        new_norm = outcome.diagnostics.q_norm_after
        stalls = stalls + 1 if new_norm >= norm else 0
        if stalls >= settings.patience:
            return Status.DIVERGED, f"no contraction for {stalls} consecutive steps"
        norm = new_norm
    if norm <= settings.stop_tol:
        return Status.CONVERGED, f"[q] = {norm:.3e} after {state.steps_done} steps"
    return None, f"[q] = {norm:.3e} after {state.steps_done} steps"


def _finish(state: ReductionState, status: Optional[Status], message: str,
            settings: KamSettings) -> KamResult:
    if status is None:
        final_eps = state.schedule.step(state.steps_done).epsilon if state.steps_done else state.schedule.epsilon
        norm = form_norm(state.perturbation, state.sigma)
        status = Status.CONVERGED if norm <= max(final_eps, settings.stop_tol) else Status.DIVERGED
    generator = None
    if status is Status.CONVERGED:
        generator = assemble_generator(
            state.generators, state.problem.forcing.dim, state.perturbation.class_tag,
            settings.max_modes, settings.grid_size,
        )
    result = KamResult(status, state.normal_form, generator, state.diagnostics,
                       state.generators, state.perturbation, message)
    logger.info(f"{state.problem.gauge.value} reduction {status.value}: {message}; normal form {state.normal_form.to_dict()}")
    return result


def _screen(problem: GaugeProblem, omega: np.ndarray, settings: KamSettings) -> Optional[KamResult]:
    if settings.diophantine is None:
        return None
    ok, margin, k = diophantine_check(omega, problem.B0, settings.diophantine, settings.diophantine_cutoff)
    if ok:
        return None
    message = f"omega fails the Diophantine screen at k={k} (margin {margin:.3e})"
    logger.info(message)
    return KamResult(Status.RESONANT, problem.base, message=message)


def _start(problem: GaugeProblem, settings: KamSettings, schedule: Optional[Schedule]) -> ReductionState:
    return ReductionState(problem, problem.base, problem.perturbation,
                          schedule or settings.schedule(problem.epsilon))


def _trivial(problem: GaugeProblem, settings: KamSettings) -> Optional[KamResult]:
    if problem.epsilon == 0 or problem.perturbation.is_zero():
        return _identity_result(problem, "unperturbed problem")
    norm = form_norm(problem.perturbation, settings.sigma0)
    if norm < settings.stop_tol:
        return _identity_result(problem, f"[q0] = {norm:.3e} below tolerance")
    return None


def kam_reduce(
    problem: GaugeProblem,
    omega: Sequence[float],
    settings: Optional[KamSettings] = None,
    schedule: Optional[Schedule] = None,
) -> KamResult:
    """
    Reduce a Landau-gauge problem to a xi1 eta1 + c xi2^2.

    Resonance and divergence are reported through ``KamResult.status``.
    Symmetric-gauge problems are handed to :func:`reduce_symmetric`.
    """
    settings = settings or KamSettings()
    if problem.gauge is Gauge.SYMMETRIC:
        return reduce_symmetric(problem, omega, settings, schedule)
    omega = _frequency(omega, problem.forcing.dim)
    trivial = _trivial(problem, settings)
    if trivial is not None:
        return trivial
    screened = _screen(problem, omega, settings)
    if screened is not None:
        return screened
    state = _start(problem, settings, schedule)
    status, message = _advance(state, omega, settings, len(state.schedule))
    return _finish(state, status, message, settings)


def symmetric_second_step(
    problem: GaugeProblem,
    omega: Sequence[float],
    settings: Optional[KamSettings] = None,
    schedule: Optional[Schedule] = None,
) -> ReductionState:
    """
    The opening steps of the symmetric reduction, after which nu2 ~ d_omega eps^2.

    A resonance in these steps raises ResonanceError, a stall DivergenceError.
    """
    settings = settings or KamSettings()
    if problem.gauge is not Gauge.SYMMETRIC:
        raise ValueError(f"expected a symmetric-gauge problem, got {problem.gauge.value}")
    omega = _frequency(omega, problem.forcing.dim)
    state = _start(problem, settings, schedule)
    status, message = _advance(state, omega, settings, settings.opening_steps)
    if status is Status.RESONANT:
        worst = state.diagnostics[-1].min_divisor if state.diagnostics else float("nan")
        raise ResonanceError(f"opening steps resonant: {message}", divisor=worst)
    if status is Status.DIVERGED:
        raise DivergenceError(f"opening steps diverged: {message}")
    logger.debug(f"opening steps done: nu1={state.normal_form.nu1:.12g} nu2={state.normal_form.nu2:.3e}")
    return state


def kam_reduce_nondegenerate(
    state: ReductionState,
    omega: Sequence[float],
    settings: Optional[KamSettings] = None,
) -> KamResult:
    """
    Continue a symmetric reduction whose normal form has |nu2| >= c eps^2.

    Divisors involving nu2 are screened against min(c' eps^2, kappa_m).
    """
    settings = settings or KamSettings()
    omega = _frequency(omega, state.problem.forcing.dim)
    epsilon = state.problem.epsilon
    nu2 = state.normal_form.nu2
    if abs(nu2) < settings.nondegeneracy * epsilon ** 2:
        raise DegenerateNormalFormError(
            f"|nu2| = {abs(nu2):.3e} below {settings.nondegeneracy} eps^2 = "
            f"{settings.nondegeneracy * epsilon ** 2:.3e}"
        )
    threshold = settings.nu2_constant * epsilon ** 2
    status, message = _advance(state, omega, settings, len(state.schedule), nu2_threshold=threshold)
    return _finish(state, status, message, settings)


def reduce_symmetric(
    problem: GaugeProblem,
    omega: Sequence[float],
    settings: Optional[KamSettings] = None,
    schedule: Optional[Schedule] = None,
) -> KamResult:
    """Opening steps followed by the non-degenerate iteration"""
    settings = settings or KamSettings()
    omega = _frequency(omega, problem.forcing.dim)
    trivial = _trivial(problem, settings)
    if trivial is not None:
        return trivial
    screened = _screen(problem, omega, settings)
    if screened is not None:
        return screened
    try:
        state = symmetric_second_step(problem, omega, settings, schedule)
    except ResonanceError as e:
        return KamResult(Status.RESONANT, problem.base, message=str(e))
    except DivergenceError as e:
        return KamResult(Status.DIVERGED, problem.base, message=str(e))
    if form_norm(state.perturbation, state.sigma) <= settings.stop_tol:
        return _finish(state, Status.CONVERGED, "converged during the opening steps", settings)
    return kam_reduce_nondegenerate(state, omega, settings)
