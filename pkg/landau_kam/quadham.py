"""
Quadratic Hamiltonians
Time-quasi-periodic quadratic forms in complex coordinates, gauge builders,
charts, Poisson brackets, reality checks and the potential families
"""

import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ConsistencyError
from .trigpoly import (
    DEFAULT_STRIP_WIDTH,
    TrigPoly,
    analyze_dense,
    evaluate,
    synthesize_dense,
)

logger = logging.getLogger(__name__)

# x = (xi1, xi2, eta1, eta2)
VARIABLES = ("xi1", "xi2", "eta1", "eta2")

# {F, G} <-> S_F P S_G - S_G P S_F
POISSON = np.block([[np.zeros((2, 2)), 1j * np.eye(2)], [-1j * np.eye(2), np.zeros((2, 2))]])
# physical field x' = E_C S x
E_C = -POISSON
# canonical structure of the cartesian chart (x1, x2, p1, p2)
J_CART = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
# (xi, eta) -> (conj eta, conj xi)
INVOLUTION = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
# xi2 = xi2' + eta2'
AMBIO = np.eye(4)
AMBIO[1, 3] = 1.0
AMBIO_INV = np.linalg.inv(AMBIO)

LANDAU_CLASS = "landau"
FULL_CLASS = "full"


class Gauge(Enum):
    LANDAU = "landau"
    SYMMETRIC = "symmetric"


class Chart(Enum):
    CARTESIAN = "cartesian"
    COMPLEX_LANDAU = "complex-landau"
    COMPLEX_SYMMETRIC = "complex-symmetric"


@dataclass(frozen=True, order=True)
class Monomial:
    """xi^alpha eta^beta of total degree two"""
    alpha: Tuple[int, int]
    beta: Tuple[int, int]

    def __post_init__(self):
        if any(e < 0 for e in self.alpha + self.beta) or sum(self.alpha) + sum(self.beta) != 2:
            raise ValueError(f"not a quadratic monomial: alpha={self.alpha}, beta={self.beta}")

    @property
    def exponents(self) -> Tuple[int, int, int, int]:
        return self.alpha + self.beta

    @property
    def indices(self) -> Tuple[int, int]:
        """Variable positions (i <= j) in the ordering of VARIABLES"""
        flat: List[int] = []
        for position, power in enumerate(self.exponents):
            flat.extend([position] * power)
        return flat[0], flat[1]

    @property
    def is_landau(self) -> bool:
        return self.beta[1] == 0

    def __str__(self) -> str:
        parts = []
        for name, power in zip(VARIABLES, self.exponents):
            if power == 1:
                parts.append(name)
            elif power == 2:
                parts.append(f"{name}^2")
        return "*".join(parts)

    @classmethod
    def from_indices(cls, i: int, j: int) -> "Monomial":
        exponents = [0, 0, 0, 0]
        exponents[i] += 1
        exponents[j] += 1
        return cls((exponents[0], exponents[1]), (exponents[2], exponents[3]))

    @classmethod
    def parse(cls, name: str) -> "Monomial":
        exponents = [0, 0, 0, 0]
        for factor in name.split("*"):
            base, _, power = factor.partition("^")
            exponents[VARIABLES.index(base)] += int(power or 1)
        return cls((exponents[0], exponents[1]), (exponents[2], exponents[3]))

    def evaluate(self, x: Sequence[complex]) -> complex:
        i, j = self.indices
        return complex(x[i] * x[j])


ALL_MONOMIALS: Tuple[Monomial, ...] = tuple(
    sorted(Monomial.from_indices(i, j) for i in range(4) for j in range(i, 4))
)
LANDAU_MONOMIALS: Tuple[Monomial, ...] = tuple(m for m in ALL_MONOMIALS if m.is_landau)

XI1_ETA1 = Monomial((1, 0), (1, 0))
XI2_ETA2 = Monomial((0, 1), (0, 1))
XI2_SQUARED = Monomial((0, 2), (0, 0))
XI1_XI2 = Monomial((1, 1), (0, 0))


def monomial_matrix(monomial: Monomial) -> np.ndarray:
    """Symmetric S with 1/2 x^T S x equal to the monomial"""
    i, j = monomial.indices
    matrix = np.zeros((4, 4))
    if i == j:
        matrix[i, i] = 2.0
    else:
        matrix[i, j] = matrix[j, i] = 1.0
    return matrix


def matrix_coefficients(matrix: np.ndarray) -> Dict[Monomial, Any]:
    """Monomial coefficients of 1/2 x^T S x; works entrywise on stacked arrays"""
    coefficients = {}
    for i in range(4):
        for j in range(i, 4):
            value = 0.5 * matrix[i, i] if i == j else 0.5 * (matrix[i, j] + matrix[j, i])
            coefficients[Monomial.from_indices(i, j)] = value
    return coefficients


def _bracket_table() -> Dict[Tuple[Monomial, Monomial], Dict[Monomial, complex]]:
    table = {}
    for first in ALL_MONOMIALS:
        for second in ALL_MONOMIALS:
            a, b = monomial_matrix(first), monomial_matrix(second)
            q = a @ POISSON @ b - b @ POISSON @ a
            table[(first, second)] = {
                m: complex(c) for m, c in matrix_coefficients(q).items() if abs(c) > 0
            }
    return table


_BRACKETS = _bracket_table()


class QuadHamiltonian:
    """
    Quadratic form sum_m c_m(theta) m(x) with trigonometric coefficients.

    The landau class carries no eta2 dependence and is closed under the
    Poisson bracket.
    """

    def __init__(
        self,
        terms: Optional[Mapping[Monomial, TrigPoly]] = None,
        class_tag: str = FULL_CLASS,
        dim: int = 1,
    ):
        if class_tag not in (LANDAU_CLASS, FULL_CLASS):
            raise ValueError(f"unknown class tag {class_tag!r}")
        cleaned: Dict[Monomial, TrigPoly] = {}
        for monomial, poly in (terms or {}).items():
            if poly.is_zero():
                continue
            if class_tag == LANDAU_CLASS and not monomial.is_landau:
                raise ValueError(f"{monomial} does not belong to the landau class")
            dim = poly.dim
            cleaned[monomial] = poly
        self.terms: Dict[Monomial, TrigPoly] = dict(sorted(cleaned.items()))
        self.class_tag = class_tag
        self.dim = dim

    def __getitem__(self, monomial: Monomial) -> TrigPoly:
        return self.terms.get(monomial, TrigPoly.zero(self.dim))

    def coefficient(self, monomial: Monomial, k: Optional[Sequence[int]] = None) -> complex:
        k = (0,) * self.dim if k is None else k
        return self[monomial].coeff(k)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def cutoff(self) -> int:
        return max((p.cutoff for p in self.terms.values()), default=0)

    @property
    def strip_width(self) -> float:
        return min((p.strip_width for p in self.terms.values()), default=DEFAULT_STRIP_WIDTH)

    def _merge(self, other: "QuadHamiltonian", sign: float) -> "QuadHamiltonian":
        terms = dict(self.terms)
        for monomial, poly in other.terms.items():
            scaled = poly if sign > 0 else -poly
            terms[monomial] = terms[monomial] + scaled if monomial in terms else scaled
        return QuadHamiltonian(terms, _join_class(self.class_tag, other.class_tag), self.dim)

    def __add__(self, other: "QuadHamiltonian") -> "QuadHamiltonian":
        return self._merge(other, 1.0)

    def __sub__(self, other: "QuadHamiltonian") -> "QuadHamiltonian":
        return self._merge(other, -1.0)

    def scale(self, factor: complex) -> "QuadHamiltonian":
        return QuadHamiltonian({m: p.scale(factor) for m, p in self.terms.items()}, self.class_tag, self.dim)

    def __neg__(self) -> "QuadHamiltonian":
        return self.scale(-1.0)

    def map_terms(self, fn: Callable[[TrigPoly], TrigPoly]) -> "QuadHamiltonian":
        return QuadHamiltonian({m: fn(p) for m, p in self.terms.items()}, self.class_tag, self.dim)

    def mean(self) -> "QuadHamiltonian":
        """theta-average, as a constant-coefficient form"""
        return self.map_terms(lambda p: TrigPoly.constant(p.mean(), p.dim, p.strip_width))

    def evaluate(self, theta: Sequence[complex], x: Sequence[complex]) -> complex:
        return sum(evaluate(p, theta) * m.evaluate(x) for m, p in self.terms.items())

    def matrix_at(self, theta: Sequence[complex]) -> np.ndarray:
        matrix = np.zeros((4, 4), dtype=complex)
        for monomial, poly in self.terms.items():
            matrix += evaluate(poly, theta) * monomial_matrix(monomial)
        return matrix

    def matrix_box(self, cutoff: Optional[int] = None) -> np.ndarray:
        """Dense Fourier coefficients of S(theta), shape (4, 4) + box"""
        cutoff = self.cutoff if cutoff is None else cutoff
        box = np.zeros((4, 4) + (2 * cutoff + 1,) * self.dim, dtype=complex)
        for monomial, poly in self.terms.items():
            box += np.multiply.outer(monomial_matrix(monomial), poly.to_dense(cutoff))
        return box

    def matrices_on_grid(self, size: int) -> np.ndarray:
        """S(theta) on the uniform grid, shape (size,)*dim + (4, 4)"""
        values = synthesize_dense(self.matrix_box(), self.dim, size)
        return np.moveaxis(values, (0, 1), (-2, -1))

    def pruned(self, floor: float) -> "QuadHamiltonian":
        return self.map_terms(lambda p: p.pruned(floor))

    def max_abs(self) -> float:
        return max((abs(v) for p in self.terms.values() for v in p.coeffs.values()), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "class_tag": self.class_tag,
            "terms": [
                {"alpha": list(m.alpha), "beta": list(m.beta), "poly": p.to_dict()}
                for m, p in self.terms.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "QuadHamiltonian":
        terms = {
            Monomial(tuple(t["alpha"]), tuple(t["beta"])): TrigPoly.from_dict(t["poly"])
            for t in data["terms"]
        }
        dim = next(iter(terms.values())).dim if terms else 1
        return cls(terms, data["class_tag"], dim)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QuadHamiltonian":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        names = ", ".join(str(m) for m in self.terms)
        return f"QuadHamiltonian(class={self.class_tag}, terms=[{names}])"


def _join_class(first: str, second: str) -> str:
    return LANDAU_CLASS if first == second == LANDAU_CLASS else FULL_CLASS


def from_matrix_box(
    box: np.ndarray,
    dim: int,
    class_tag: str = FULL_CLASS,
    strip_width: float = DEFAULT_STRIP_WIDTH,
    drop_below: float = 0.0,
) -> QuadHamiltonian:
    """Inverse of :meth:`QuadHamiltonian.matrix_box`"""
    terms = {}
    for monomial, coefficients in matrix_coefficients(box).items():
        if class_tag == LANDAU_CLASS and not monomial.is_landau:
            continue
        terms[monomial] = TrigPoly.from_dense(coefficients, dim, strip_width, drop_below=drop_below)
    return QuadHamiltonian(terms, class_tag, dim)


def from_grid_matrices(
    values: np.ndarray,
    dim: int,
    cutoff: int,
    class_tag: str = FULL_CLASS,
    strip_width: float = DEFAULT_STRIP_WIDTH,
    drop_below: float = 0.0,
) -> QuadHamiltonian:
    """Fourier-analyse matrices sampled on a grid, shape (G,)*dim + (4, 4)"""
    matrices = np.moveaxis(values, (-2, -1), (0, 1))
    box = analyze_dense(matrices, dim, cutoff)
    return from_matrix_box(box, dim, class_tag, strip_width, drop_below)


def constant_form(coefficients: Mapping[Monomial, complex], class_tag: str = FULL_CLASS,
                  dim: int = 1, strip_width: float = DEFAULT_STRIP_WIDTH) -> QuadHamiltonian:
    return QuadHamiltonian(
        {m: TrigPoly.constant(c, dim, strip_width) for m, c in coefficients.items()}, class_tag, dim
    )


def poisson_bracket(first: QuadHamiltonian, second: QuadHamiltonian) -> QuadHamiltonian:
    """Exact bracket; theta enters coefficientwise"""
    terms: Dict[Monomial, TrigPoly] = {}
    for m1, p1 in first.terms.items():
        for m2, p2 in second.terms.items():
            entries = _BRACKETS[(m1, m2)]
            if not entries:
                continue
            coefficient = p1 * p2
            for monomial, weight in entries.items():
                scaled = coefficient.scale(weight)
                terms[monomial] = terms[monomial] + scaled if monomial in terms else scaled
    return QuadHamiltonian(terms, _join_class(first.class_tag, second.class_tag),
                           max(first.dim, second.dim))


def advect(form: QuadHamiltonian, omega: Sequence[float]) -> QuadHamiltonian:
    """{F, omega . I} = omega . grad_theta F"""
    return form.map_terms(lambda p: p.advect(omega))


@dataclass(frozen=True)
class NormalForm:
    """
    Constant-coefficient resonant form.

    landau: nu1 xi1 eta1 + second xi2^2 (second is the drift constant c).
    symmetric: nu1 xi1 eta1 + second xi2 eta2 (second is nu2).
    """
    kind: str
    nu1: float
    second: float = 0.0
    dim: int = 1

    @property
    def nu2(self) -> float:
        return self.second if self.kind == Gauge.SYMMETRIC.value else 0.0

    @property
    def drift(self) -> float:
        return self.second if self.kind == Gauge.LANDAU.value else 0.0

    @property
    def second_monomial(self) -> Monomial:
        return XI2_SQUARED if self.kind == Gauge.LANDAU.value else XI2_ETA2

    @property
    def class_tag(self) -> str:
        return LANDAU_CLASS if self.kind == Gauge.LANDAU.value else FULL_CLASS

    def to_hamiltonian(self) -> QuadHamiltonian:
        return constant_form({XI1_ETA1: self.nu1, self.second_monomial: self.second},
                             self.class_tag, self.dim)

    def shifted(self, increment: QuadHamiltonian) -> "NormalForm":
        """Add the kernel averages of ``increment``"""
        delta_nu1 = increment.coefficient(XI1_ETA1)
        delta_second = increment.coefficient(self.second_monomial)
        imaginary = max(abs(delta_nu1.imag), abs(delta_second.imag))
        if imaginary > 1e-10:
            logger.warning(f"normal-form increment has imaginary part {imaginary:.3e}")
        return NormalForm(self.kind, self.nu1 + delta_nu1.real, self.second + delta_second.real, self.dim)

    def to_dict(self) -> Dict[str, Any]:
        key = "c" if self.kind == Gauge.LANDAU.value else "nu2"
        return {"kind": self.kind, "nu1": self.nu1, key: self.second}


@dataclass(frozen=True)
class PhasePoint:
    chart: Chart
    values: np.ndarray


@dataclass
class GaugeProblem:
    """Base normal form plus perturbation q = first_order + second_order"""
    gauge: Gauge
    B0: float
    epsilon: float
    forcing: TrigPoly
    base: NormalForm
    perturbation: QuadHamiltonian
    first_order: QuadHamiltonian
    second_order: QuadHamiltonian

    @property
    def hamiltonian(self) -> QuadHamiltonian:
        return self.base.to_hamiltonian() + self.perturbation

    @property
    def chart_transform(self) -> np.ndarray:
        """Matrix taking gauge-chart coordinates to the working chart"""
        return AMBIO_INV if self.gauge is Gauge.LANDAU else np.eye(4)


# charts ---------------------------------------------------------------

def chart_matrix(chart: Chart, B0: float) -> np.ndarray:
    """T with x_chart = T (x1, x2, p1, p2); complex rows (z1, z2, conj z1, conj z2)"""
    if B0 <= 0:
        raise ValueError(f"B0 must be positive, got {B0}")
    if chart is Chart.CARTESIAN:
        return np.eye(4, dtype=complex)
    if chart is Chart.COMPLEX_LANDAU:
        s = np.sqrt(2.0 * B0)
        rows = np.array([
            [0.0, B0 / s, -1.0 / s, 1j / s],
            [B0 / s, 0.0, 1j / s, -1.0 / s],
        ])
    else:
        r = np.sqrt(B0)
        # y_j + i eta_j over sqrt(2)
        y = np.array([[0.0, r / 2, -1.0 / r, 0.0], [0.0, -r / 2, -1.0 / r, 0.0]])
        eta = np.array([[r / 2, 0.0, 0.0, 1.0 / r], [r / 2, 0.0, 0.0, -1.0 / r]])
        rows = (y + 1j * eta) / np.sqrt(2.0)
    return np.vstack([rows, rows.conj()])


def chart_jacobian(chart: Chart, B0: float) -> np.ndarray:
    """Real canonical chart (sqrt2 Re z, sqrt2 Im z) as a matrix of the cartesian chart"""
    transform = chart_matrix(chart, B0)
    if chart is Chart.CARTESIAN:
        return transform.real
    z = transform[:2]
    return np.sqrt(2.0) * np.vstack([z.real, z.imag])


def chart_map(point: PhasePoint, target: Chart, B0: float) -> PhasePoint:
    """Linear symplectic change between the cartesian and complex charts"""
    source = chart_matrix(point.chart, B0)
    destination = chart_matrix(target, B0)
    cartesian = np.linalg.solve(source, np.asarray(point.values, dtype=complex))
    values = destination @ cartesian
    if target is Chart.CARTESIAN:
        values = values.real
    return PhasePoint(target, values)


def gauge_chart(gauge: Gauge) -> Chart:
    return Chart.COMPLEX_LANDAU if gauge is Gauge.LANDAU else Chart.COMPLEX_SYMMETRIC


def cartesian_matrix(gauge: Gauge, B: float) -> np.ndarray:
    """S of h = 1/2 X^T S X for (p - A)^2 at field strength B"""
    matrix = np.zeros((4, 4))
    matrix[2, 2] = matrix[3, 3] = 2.0
    if gauge is Gauge.LANDAU:
        matrix[1, 1] = 2.0 * B * B
        matrix[1, 2] = matrix[2, 1] = -2.0 * B
    else:
        matrix[0, 0] = matrix[1, 1] = 0.5 * B * B
        matrix[1, 2] = matrix[2, 1] = -B
        matrix[0, 3] = matrix[3, 0] = B
    return matrix


def cartesian_expansion(gauge: Gauge, B0: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S(B0 + d) = S0 + d S1 + d^2 S2 exactly"""
    s0 = cartesian_matrix(gauge, B0)
    plus = cartesian_matrix(gauge, B0 + 1.0)
    minus = cartesian_matrix(gauge, B0 - 1.0)
    s1 = 0.5 * (plus - minus)
    s2 = 0.5 * (plus + minus) - s0
    return s0, s1, s2


def complex_form(gauge: Gauge, B0: float, cartesian: np.ndarray) -> np.ndarray:
    """Symmetric matrix of a cartesian quadratic form in the working chart of the gauge"""
    transform = chart_matrix(gauge_chart(gauge), B0)
    inverse = np.linalg.inv(transform)
    matrix = inverse.T @ cartesian @ inverse
    if gauge is Gauge.LANDAU:
        matrix = AMBIO.T @ matrix @ AMBIO
    return 0.5 * (matrix + matrix.T)


def working_transform(gauge: Gauge, B0: float) -> np.ndarray:
    """x_working = W (x1, x2, p1, p2)"""
    transform = chart_matrix(gauge_chart(gauge), B0)
    return AMBIO_INV @ transform if gauge is Gauge.LANDAU else transform


def _validate(B0: float, forcing: TrigPoly) -> None:
    if B0 <= 0:
        raise ValueError(f"B0 must be positive, got {B0}")
    if abs(forcing.mean()) > 1e-14:
        raise ValueError(f"forcing must have zero mean, got f(0) = {forcing.mean()}")
    if not forcing.is_real_valued():
        raise ValueError("forcing must be real valued")


def _build(gauge: Gauge, B0: float, forcing: TrigPoly, epsilon: float) -> GaugeProblem:
    _validate(B0, forcing)
    class_tag = LANDAU_CLASS if gauge is Gauge.LANDAU else FULL_CLASS
    _, s1, s2 = cartesian_expansion(gauge, B0)
    square = forcing * forcing

    def assemble(matrix: np.ndarray, poly: TrigPoly) -> QuadHamiltonian:
        terms = {}
        for monomial, value in matrix_coefficients(complex_form(gauge, B0, matrix)).items():
            if abs(value) < 1e-14:
                continue
            if class_tag == LANDAU_CLASS and not monomial.is_landau:
                raise ConsistencyError(f"{monomial} leaked out of the landau class")
            terms[monomial] = poly.scale(value)
        return QuadHamiltonian(terms, class_tag, forcing.dim)

    first = assemble(s1, forcing.scale(epsilon))
    second = assemble(s2, square.scale(epsilon * epsilon))
    base = NormalForm(gauge.value, 2.0 * B0, 0.0, forcing.dim)
    problem = GaugeProblem(gauge, B0, epsilon, forcing, base, first + second, first, second)
    logger.debug(f"built {gauge.value} problem B0={B0} epsilon={epsilon}: {problem.perturbation}")
    return problem


def build_landau(B0: float, forcing: TrigPoly, epsilon: float) -> GaugeProblem:
    """Landau-gauge problem in the ambio chart (landau class)"""
    return _build(Gauge.LANDAU, B0, forcing, epsilon)


def build_symmetric(B0: float, forcing: TrigPoly, epsilon: float) -> GaugeProblem:
    return _build(Gauge.SYMMETRIC, B0, forcing, epsilon)


def build_problem(gauge: Gauge, B0: float, forcing: TrigPoly, epsilon: float) -> GaugeProblem:
    return _build(gauge, B0, forcing, epsilon)


# reality --------------------------------------------------------------

def reality_matrix(class_tag: str) -> np.ndarray:
    """R' with real states x = R' conj(x) in the chart of the class"""
    if class_tag == LANDAU_CLASS:
        return AMBIO_INV @ INVOLUTION @ AMBIO
    return INVOLUTION.astype(float)


def real_states(class_tag: str, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random involution-fixed states in the chart of the class"""
    z = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
    states = np.hstack([z, z.conj()])
    if class_tag == LANDAU_CLASS:
        states = states @ AMBIO_INV.T
    return states


def reality_check(form: QuadHamiltonian, samples: int = 16, seed: int = 0,
                  tol: float = 1e-10) -> Tuple[bool, float]:
    """Is the form real on real states and real phases? Returns (ok, max |Im|)"""
    rng = np.random.default_rng(seed)
    states = real_states(form.class_tag, samples, rng)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(samples, form.dim))
    worst = 0.0
    for x, theta in zip(states, phases):
        value = form.evaluate(theta, x)
        worst = max(worst, abs(value.imag) / max(1.0, abs(value)))
    return worst <= tol, worst


def is_matrix_real(matrices: np.ndarray, class_tag: str, tol: float = 1e-9) -> Tuple[bool, float]:
    """R' conj(M) R'^{-1} == M for a linear map acting on the chart of the class"""
    reality = reality_matrix(class_tag)
    mirrored = reality @ np.conj(matrices) @ np.linalg.inv(reality)
    worst = float(np.max(np.abs(mirrored - matrices))) if matrices.size else 0.0
    return worst <= tol, worst


# potentials -----------------------------------------------------------

class PotentialFamily(Enum):
    LANDAU = "landau"
    SYMMETRIC = "symmetric"
    SYMMETRIC_WITH_SCALAR = "symmetric+scalar"
    LANDAU_WITH_SCALAR = "landau+scalar"


class ElectromagneticPotential(ABC):
    """Vector potential A(t, x) = B(t) L x with scalar potential U(t, x) in the plane"""

    def __init__(self, B0: float, forcing: TrigPoly, epsilon: float, omega: Sequence[float]):
        self.B0 = B0
        self.forcing = forcing
        self.epsilon = epsilon
        self.omega = np.atleast_1d(np.asarray(omega, dtype=float))

    def field(self, t: float) -> float:
        return self.B0 + self.epsilon * evaluate(self.forcing, self.omega * t).real

    def field_rate(self, t: float) -> float:
        return self.epsilon * evaluate(self.forcing.advect(self.omega), self.omega * t).real

    @property
    @abstractmethod
    def family(self) -> PotentialFamily:
        ...

    @property
    @abstractmethod
    def linear_part(self) -> np.ndarray:
        """2x2 matrix L with A = B(t) L x"""

    def vector(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.field(t) * (self.linear_part @ x)

    def vector_rate(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.field_rate(t) * (self.linear_part @ x)

    def scalar_gradient(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.zeros(2)

    def magnetic(self, t: float, x: np.ndarray) -> float:
        """d1 A2 - d2 A1, exact for a potential linear in x"""
        curl = self.linear_part[1, 0] - self.linear_part[0, 1]
        return self.field(t) * curl

    def electric(self, t: float, x: np.ndarray) -> np.ndarray:
        return -self.vector_rate(t, x) - self.scalar_gradient(t, x)


class LandauPotential(ElectromagneticPotential):
    family = PotentialFamily.LANDAU
    linear_part = np.array([[0.0, 1.0], [0.0, 0.0]])


class SymmetricPotential(ElectromagneticPotential):
    family = PotentialFamily.SYMMETRIC
    linear_part = np.array([[0.0, 0.5], [-0.5, 0.0]])


class SymmetricWithScalarPotential(SymmetricPotential):
    """Symmetric A with U = +B' x1 x2 / 2; reproduces the Landau-gauge fields"""
    family = PotentialFamily.SYMMETRIC_WITH_SCALAR

    def scalar_gradient(self, t, x):
        return 0.5 * self.field_rate(t) * np.array([x[1], x[0]])


class LandauWithScalarPotential(LandauPotential):
    """Landau A with U = -B' x1 x2 / 2; reproduces the symmetric-gauge fields"""
    family = PotentialFamily.LANDAU_WITH_SCALAR

    def scalar_gradient(self, t, x):
        return -0.5 * self.field_rate(t) * np.array([x[1], x[0]])


POTENTIALS = {
    PotentialFamily.LANDAU: LandauPotential,
    PotentialFamily.SYMMETRIC: SymmetricPotential,
    PotentialFamily.SYMMETRIC_WITH_SCALAR: SymmetricWithScalarPotential,
    PotentialFamily.LANDAU_WITH_SCALAR: LandauWithScalarPotential,
}


def fields_from_potentials(
    family: PotentialFamily,
    B0: float,
    forcing: TrigPoly,
    epsilon: float,
    omega: Sequence[float],
    t: float,
    x: Sequence[float],
) -> Tuple[float, np.ndarray]:
    """(B, E) at time t and position x; B = d1 A2 - d2 A1 and E = -dA/dt - grad U"""
    potential = POTENTIALS[family](B0, forcing, epsilon, omega)
    point = np.asarray(x, dtype=float)
    return potential.magnetic(t, point), potential.electric(t, point)
