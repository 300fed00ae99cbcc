"""
Small divisors and the homological equation
Diophantine screening of the forcing frequency and the one-step solver
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConsistencyError, ResonanceError
from .quadham import (
    ALL_MONOMIALS,
    LANDAU_MONOMIALS,
    XI1_ETA1,
    XI2_ETA2,
    XI2_SQUARED,
    Gauge,
    Monomial,
    NormalForm,
    QuadHamiltonian,
    advect,
    poisson_bracket,
)
from .trigpoly import TrigPoly, l1, modes_within

logger = logging.getLogger(__name__)

RESONANCE_FLOOR = 1e-8
EXACTNESS_TOL = 1e-11
# multiples l of 2 B0 screened against omega.k; |l| = 2 is opt-in
CYCLOTRON_HARMONICS = (1,)


@dataclass(frozen=True)
class DiophantineParams:
    gamma: float
    tau: float

    def __post_init__(self):
        if self.gamma <= 0 or self.tau <= 0:
            raise ValueError(f"gamma and tau must be positive, got ({self.gamma}, {self.tau})")


@dataclass(frozen=True)
class DivisorEntry:
    monomial: Monomial
    mode: Tuple[int, ...]
    divisor: complex


@dataclass
class DivisorReport:
    entries: List[DivisorEntry] = field(default_factory=list)
    offending: List[DivisorEntry] = field(default_factory=list)

    @property
    def min_modulus(self) -> float:
        return min((abs(e.divisor) for e in self.entries), default=float("inf"))

    @property
    def worst(self) -> Optional[DivisorEntry]:
        return min(self.entries, key=lambda e: abs(e.divisor), default=None)


@dataclass
class HomologicalSolution:
    chi: QuadHamiltonian
    average: QuadHamiltonian
    remainder: QuadHamiltonian
    report: DivisorReport


def diophantine_check(
    omega: Sequence[float],
    B0: float,
    params: DiophantineParams,
    K_max: int,
    harmonics: Sequence[int] = CYCLOTRON_HARMONICS,
) -> Tuple[bool, float, Tuple[int, ...]]:
    """
    Screen omega against both small-divisor families for |k|_1 <= K_max:

        |omega.k + 2 B0 l| >= gamma / (1 + |k|_1^tau)   for l in harmonics, k = 0 included
        |omega.k|          >= gamma / |k|_1^tau         for k != 0

    The box of k is symmetric, so l = 1 also covers l = -1.
    Returns (passes, worst margin, worst k); the margin is the smallest ratio
    of a left side to its right side over both families.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    worst_margin = float("inf")
    worst_k: Tuple[int, ...] = (0,) * omega.size
    for k in modes_within(omega.size, K_max):
        weight = l1(k) ** params.tau
        wk = float(np.dot(omega, k))
        margins = [abs(wk + 2.0 * B0 * harmonic) * (1.0 + weight) / params.gamma for harmonic in harmonics]
        if any(k):
            margins.append(abs(wk) * weight / params.gamma)
        margin = min(margins)
        if margin < worst_margin:
            worst_margin, worst_k = margin, tuple(k)
    return worst_margin >= 1.0, worst_margin, worst_k


def is_kernel(kind: str, monomial: Monomial, mode: Sequence[int]) -> bool:
    if any(mode):
        return False
    if kind == Gauge.LANDAU.value:
        return monomial in (XI1_ETA1, XI2_SQUARED)
    return monomial in (XI1_ETA1, XI2_ETA2)


def divisor(base: NormalForm, omega: np.ndarray, monomial: Monomial, mode: Sequence[int]) -> float:
    """D with {m e^{ik.theta}, omega.I + base} = i D m e^{ik.theta} (diagonal part)"""
    (a1, a2), (b1, b2) = monomial.alpha, monomial.beta
    return base.nu1 * (a1 - b1) + base.nu2 * (a2 - b2) + float(np.dot(omega, mode))


def involves_nu2(monomial: Monomial) -> bool:
    return monomial.alpha[1] != monomial.beta[1]


def small_divisors(
    base: NormalForm,
    omega: Sequence[float],
    K: int,
    threshold: Optional[float] = None,
) -> DivisorReport:
    """Divisors i D over every non-kernel (monomial, k) with |k|_1 <= K"""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    monomials = LANDAU_MONOMIALS if base.kind == Gauge.LANDAU.value else ALL_MONOMIALS
    report = DivisorReport()
    for monomial in monomials:
        for mode in modes_within(omega.size, K):
            if is_kernel(base.kind, monomial, mode):
                continue
            entry = DivisorEntry(monomial, mode, 1j * divisor(base, omega, monomial, mode))
            report.entries.append(entry)
            limit = RESONANCE_FLOOR * (1 + l1(mode)) if threshold is None else threshold
            if abs(entry.divisor) < limit:
                report.offending.append(entry)
    return report


def solve_homological(
    base: NormalForm,
    omega: Sequence[float],
    q: QuadHamiltonian,
    kappa: float,
    K: int,
    nu2_threshold: Optional[float] = None,
    presence_tol: float = 0.0,
    verify: bool = True,
) -> HomologicalSolution:
    """
    Solve {chi, omega.I + base} + q = average + remainder.

    chi(k) = i q(k) / D on non-kernel pairs with |k|_1 <= K, average collects
    the kernel means and remainder the modes beyond K. Coefficients at or below
    ``presence_tol`` are left in the remainder instead of being divided.
    With ``verify`` (the default) the exactness residual is recomputed and a
    mismatch above EXACTNESS_TOL raises ConsistencyError; pass False to skip it.
    A needed divisor below kappa (or below min(nu2_threshold, kappa) when it
    involves nu2) raises ResonanceError.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    chi_terms: Dict[Monomial, Dict[Tuple[int, ...], complex]] = {}
    average_terms: Dict[Monomial, Dict[Tuple[int, ...], complex]] = {}
    remainder_terms: Dict[Monomial, Dict[Tuple[int, ...], complex]] = {}
    report = DivisorReport()

    for monomial, poly in q.terms.items():
        for mode, value in poly.coeffs.items():
            if l1(mode) > K or abs(value) <= presence_tol:
                remainder_terms.setdefault(monomial, {})[mode] = value
                continue
            if is_kernel(base.kind, monomial, mode):
                average_terms.setdefault(monomial, {})[mode] = value
                continue
            d = divisor(base, omega, monomial, mode)
            entry = DivisorEntry(monomial, mode, 1j * d)
            report.entries.append(entry)
            threshold = kappa
            if nu2_threshold is not None and involves_nu2(monomial):
                threshold = min(nu2_threshold, kappa)
            if abs(d) < threshold:
                report.offending.append(entry)
                raise ResonanceError(
                    f"|D| = {abs(d):.3e} below {threshold:.3e} for {monomial} at k={mode}",
                    mode=mode, monomial=str(monomial), divisor=1j * d, threshold=threshold,
                )
            chi_terms.setdefault(monomial, {})[mode] = 1j * value / d

    def assemble(terms: Dict[Monomial, Dict[Tuple[int, ...], complex]], cutoff: int) -> QuadHamiltonian:
        return QuadHamiltonian(
            {m: TrigPoly(q.dim, modes, cutoff, q.strip_width) for m, modes in terms.items()},
            q.class_tag, q.dim,
        )

    solution = HomologicalSolution(
        chi=assemble(chi_terms, min(K, q.cutoff)),
        average=assemble(average_terms, 0),
        remainder=assemble(remainder_terms, q.cutoff),
        report=report,
    )
    logger.debug(
        f"homological solve K={K} kappa={kappa:.3e}: {len(report.entries)} divisors, "
        f"min |D| = {report.min_modulus:.3e}"
    )
    if verify:
        residual = homological_residual(base, omega, q, solution)
        scale = max(1.0, q.max_abs())
        if residual > EXACTNESS_TOL * scale:
            raise ConsistencyError(f"homological residual {residual:.3e} exceeds {EXACTNESS_TOL * scale:.1e}")
    return solution


def homological_residual(
    base: NormalForm,
    omega: Sequence[float],
    q: QuadHamiltonian,
    solution: HomologicalSolution,
) -> float:
    """max coefficient of {chi, omega.I + base} + q - average - remainder"""
    lhs = (poisson_bracket(solution.chi, base.to_hamiltonian()) + advect(solution.chi, omega)) + q
    residual = lhs - solution.average - solution.remainder
    return residual.max_abs()
