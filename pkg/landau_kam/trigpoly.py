"""
Trigonometric polynomials on the torus
Sparse truncated Fourier series with strip norms and FFT analysis/synthesis
"""

import json
import logging
from itertools import product as cartesian_product
from types import MappingProxyType
from typing import Any, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal

from .errors import GridResolutionError, StripError

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]
Number = Union[int, float, complex]

DEFAULT_STRIP_WIDTH = 1.0
STRIP_SLACK = 1e-12


def l1(k: Sequence[int]) -> int:
    """|k|_1 of a multi-index"""
    return int(sum(abs(int(x)) for x in k))


def modes_within(dim: int, cutoff: int) -> Iterator[MultiIndex]:
    """Every multi-index with |k|_1 <= cutoff, in lexicographic order"""
    axis = range(-cutoff, cutoff + 1)
    for k in cartesian_product(axis, repeat=dim):
        if l1(k) <= cutoff:
            yield tuple(k)


def grid_points(dim: int, size: int) -> np.ndarray:
    """Uniform grid on T^dim, shape (size,)*dim + (dim,)"""
    axis = 2.0 * np.pi * np.arange(size) / size
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(mesh, axis=-1)


def box_mask(dim: int, cutoff: int) -> np.ndarray:
    """Boolean mask of |k|_1 <= cutoff on the dense box of side 2*cutoff+1"""
    axis = np.abs(np.arange(-cutoff, cutoff + 1))
    total = np.zeros((2 * cutoff + 1,) * dim, dtype=int)
    for d in range(dim):
        shape = [1] * dim
        shape[d] = -1
        total = total + axis.reshape(shape)
    return total <= cutoff


def analyze_dense(values: np.ndarray, dim: int, cutoff: int) -> np.ndarray:
    """
    Normalised Fourier coefficients of grid samples, returned on the dense box.

    Parameters
    ----------
    values : numpy.ndarray
        Samples with the grid axes last, shape ``batch + (G,)*dim``.
    dim : int
        Torus dimension.
    cutoff : int
        Largest |k|_1 kept; entries outside the diamond are zeroed.

    Returns
    -------
    box : numpy.ndarray
        Complex array of shape ``batch + (2*cutoff+1,)*dim`` indexed by ``k + cutoff``.
    """
    grid_shape = values.shape[values.ndim - dim:]
    required = 2 * cutoff + 1
    if min(grid_shape) < required:
        raise GridResolutionError(
            f"grid of shape {grid_shape} cannot resolve cutoff {cutoff}; "
            f"need at least {required} points per dimension"
        )
    axes = tuple(range(values.ndim - dim, values.ndim))
    spectrum = np.fft.fftn(values, axes=axes) / float(np.prod(grid_shape))
    box = spectrum
    for offset, size in zip(axes, grid_shape):
        index = np.arange(-cutoff, cutoff + 1) % size
        box = np.take(box, index, axis=offset)
    return box * box_mask(dim, cutoff)


def synthesize_dense(box: np.ndarray, dim: int, size: int) -> np.ndarray:
    """Inverse of :func:`analyze_dense` on a grid with ``size`` points per dimension"""
    side = box.shape[-1]
    cutoff = (side - 1) // 2
    if size < side:
        raise GridResolutionError(
            f"cannot synthesize cutoff {cutoff} on {size} points per dimension"
        )
    batch = box.shape[: box.ndim - dim]
    spectrum = np.zeros(batch + (size,) * dim, dtype=complex)
    index = np.ix_(*([np.arange(-cutoff, cutoff + 1) % size] * dim))
    spectrum[(Ellipsis,) + index] = box
    axes = tuple(range(spectrum.ndim - dim, spectrum.ndim))
    return np.fft.ifftn(spectrum, axes=axes) * float(size ** dim)


class TrigPoly:
    """
    Truncated Fourier series sum_k c_k e^{i k.theta} on T^dim.

    Only modes with |k|_1 <= cutoff are stored and exact zeros are dropped.
    A value is immutable; every operation returns a new polynomial.
    """

    __slots__ = ("dim", "cutoff", "strip_width", "real", "_coeffs")

    def __init__(
        self,
        dim: int,
        coeffs: Optional[Mapping[Sequence[int], Number]] = None,
        cutoff: Optional[int] = None,
        strip_width: float = DEFAULT_STRIP_WIDTH,
        real: Optional[bool] = None,
    ):
        if dim < 1:
            raise ValueError(f"torus dimension must be positive, got {dim}")
        if strip_width < 0:
            raise ValueError(f"strip width must be non-negative, got {strip_width}")
        cleaned: Dict[MultiIndex, complex] = {}
        for k, value in (coeffs or {}).items():
            key = tuple(int(x) for x in k)
            if len(key) != dim:
                raise ValueError(f"mode {key} does not match dimension {dim}")
            value = complex(value)
            if value != 0:
                cleaned[key] = value
        largest = max((l1(k) for k in cleaned), default=0)
        if cutoff is None:
            cutoff = largest
        elif largest > cutoff:
            raise ValueError(f"mode with |k|_1 = {largest} exceeds cutoff {cutoff}")
        self.dim = dim
        self.cutoff = int(cutoff)
        self.strip_width = float(strip_width)
        self._coeffs = MappingProxyType(cleaned)
        self.real = self._hermitian(0.0) if real is None else bool(real)

    # construction -----------------------------------------------------

    @classmethod
    def zero(cls, dim: int = 1, cutoff: int = 0, strip_width: float = DEFAULT_STRIP_WIDTH) -> "TrigPoly":
        return cls(dim, {}, cutoff, strip_width, real=True)

    @classmethod
    def constant(cls, value: Number, dim: int = 1, strip_width: float = DEFAULT_STRIP_WIDTH) -> "TrigPoly":
        return cls(dim, {(0,) * dim: value}, 0, strip_width)

    @classmethod
    def from_modes(
        cls,
        modes: Mapping[Sequence[int], Number],
        dim: Optional[int] = None,
        strip_width: float = DEFAULT_STRIP_WIDTH,
    ) -> "TrigPoly":
        if dim is None:
            dim = len(next(iter(modes))) if modes else 1
        return cls(dim, modes, None, strip_width)

    @classmethod
    def sine(cls, direction: Sequence[int] = (1,), amplitude: float = 1.0,
             strip_width: float = DEFAULT_STRIP_WIDTH) -> "TrigPoly":
        """amplitude * sin(direction . theta)"""
        k = tuple(int(x) for x in direction)
        minus = tuple(-x for x in k)
        return cls(len(k), {k: -0.5j * amplitude, minus: 0.5j * amplitude}, None, strip_width, real=True)

    @classmethod
    def cosine(cls, direction: Sequence[int] = (1,), amplitude: float = 1.0,
               strip_width: float = DEFAULT_STRIP_WIDTH) -> "TrigPoly":
        """amplitude * cos(direction . theta)"""
        k = tuple(int(x) for x in direction)
        minus = tuple(-x for x in k)
        return cls(len(k), {k: 0.5 * amplitude, minus: 0.5 * amplitude}, None, strip_width, real=True)

    @classmethod
    def from_dense(cls, box: np.ndarray, dim: int, strip_width: float = DEFAULT_STRIP_WIDTH,
                   real: Optional[bool] = None, drop_below: float = 0.0) -> "TrigPoly":
        cutoff = (box.shape[0] - 1) // 2
        mask = box_mask(dim, cutoff) & (np.abs(box) > drop_below)
        coeffs = {
            tuple(int(i) - cutoff for i in index): box[tuple(index)]
            for index in np.argwhere(mask)
        }
        return cls(dim, coeffs, cutoff, strip_width, real=real)

    # access -----------------------------------------------------------

    @property
    def coeffs(self) -> Mapping[MultiIndex, complex]:
        return self._coeffs

    def coeff(self, k: Sequence[int]) -> complex:
        return self._coeffs.get(tuple(int(x) for x in k), 0j)

    def modes(self) -> Iterable[MultiIndex]:
        return self._coeffs.keys()

    def is_zero(self) -> bool:
        return not self._coeffs

    def mean(self) -> complex:
        return self.coeff((0,) * self.dim)

    def to_dense(self, cutoff: Optional[int] = None) -> np.ndarray:
        cutoff = self.cutoff if cutoff is None else cutoff
        box = np.zeros((2 * cutoff + 1,) * self.dim, dtype=complex)
        for k, value in self._coeffs.items():
            if l1(k) <= cutoff:
                box[tuple(x + cutoff for x in k)] = value
        return box

    def _hermitian(self, tol: float) -> bool:
        for k, value in self._coeffs.items():
            partner = self._coeffs.get(tuple(-x for x in k), 0j)
            if abs(value - partner.conjugate()) > tol:
                return False
        return True

    def is_real_valued(self, tol: float = 1e-12) -> bool:
        return self._hermitian(tol)

    def distance(self, other: "TrigPoly") -> float:
        """Largest coefficient difference"""
        keys = set(self._coeffs) | set(other._coeffs)
        return max((abs(self.coeff(k) - other.coeff(k)) for k in keys), default=0.0)

    # arithmetic -------------------------------------------------------

    def _combine(self, other: "TrigPoly", sign: float) -> "TrigPoly":
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch {self.dim} != {other.dim}")
        coeffs = dict(self._coeffs)
        for k, value in other._coeffs.items():
            coeffs[k] = coeffs.get(k, 0j) + sign * value
        return TrigPoly(
            self.dim, coeffs, max(self.cutoff, other.cutoff),
            min(self.strip_width, other.strip_width), real=self.real and other.real,
        )

    def __add__(self, other: Union["TrigPoly", Number]) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other, self.dim, self.strip_width)
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other: Union["TrigPoly", Number]) -> "TrigPoly":
        if not isinstance(other, TrigPoly):
            other = TrigPoly.constant(other, self.dim, self.strip_width)
        return self._combine(other, -1.0)

    def __neg__(self) -> "TrigPoly":
        return self.scale(-1.0)

    def scale(self, factor: Number) -> "TrigPoly":
        factor = complex(factor)
        coeffs = {k: factor * v for k, v in self._coeffs.items()}
        return TrigPoly(self.dim, coeffs, self.cutoff, self.strip_width,
                        real=self.real and factor.imag == 0)

    def __mul__(self, other: Union["TrigPoly", Number]) -> "TrigPoly":
        if isinstance(other, TrigPoly):
            return product(self, other)
        return self.scale(other)

    def __rmul__(self, other: Number) -> "TrigPoly":
        return self.scale(other)

    def conjugate(self) -> "TrigPoly":
        """Pointwise complex conjugate of the function"""
        coeffs = {tuple(-x for x in k): v.conjugate() for k, v in self._coeffs.items()}
        return TrigPoly(self.dim, coeffs, self.cutoff, self.strip_width, real=self.real)

    def real_part(self) -> "TrigPoly":
        return (self + self.conjugate()).scale(0.5)._as_real()

    def _as_real(self) -> "TrigPoly":
        return TrigPoly(self.dim, self._coeffs, self.cutoff, self.strip_width, real=True)

    def advect(self, omega: Sequence[float]) -> "TrigPoly":
        """omega . grad_theta"""
        omega = np.asarray(omega, dtype=float)
        coeffs = {k: 1j * float(np.dot(omega, k)) * v for k, v in self._coeffs.items()}
        return TrigPoly(self.dim, coeffs, self.cutoff, self.strip_width, real=self.real)

    def pruned(self, floor: float) -> "TrigPoly":
        """Drop coefficients with modulus at or below ``floor``"""
        coeffs = {k: v for k, v in self._coeffs.items() if abs(v) > floor}
        return TrigPoly(self.dim, coeffs, self.cutoff, self.strip_width, real=self.real)

    def with_strip(self, strip_width: float) -> "TrigPoly":
        return TrigPoly(self.dim, self._coeffs, self.cutoff, strip_width, real=self.real)

    # serialisation ----------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "cutoff": self.cutoff,
            "strip_width": self.strip_width,
            "coeffs": [[list(k), v.real, v.imag] for k, v in sorted(self._coeffs.items())],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrigPoly":
        coeffs = {tuple(k): complex(re, im) for k, re, im in data["coeffs"]}
        return cls(int(data["dim"]), coeffs, int(data["cutoff"]), float(data["strip_width"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "TrigPoly":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return (self.dim == other.dim and self.cutoff == other.cutoff
                and self.strip_width == other.strip_width
                and dict(self._coeffs) == dict(other._coeffs))

    def __repr__(self) -> str:
        return (f"TrigPoly(dim={self.dim}, cutoff={self.cutoff}, "
                f"strip_width={self.strip_width}, modes={len(self._coeffs)})")


def fourier_analyze(
    samples: np.ndarray,
    cutoff: int,
    strip_width: float = DEFAULT_STRIP_WIDTH,
    drop_below: float = 0.0,
) -> TrigPoly:
    """
    Fourier coefficients of samples on a uniform grid over T^n.

    Parameters
    ----------
    samples : numpy.ndarray
        Values at theta_j = 2 pi j / G, one array axis per torus dimension.
    cutoff : int
        Keep modes with |k|_1 <= cutoff. Every axis needs at least
        ``2*cutoff+1`` points.
    strip_width : float
        Declared analyticity strip of the result.
    drop_below : float
        Coefficients with modulus at or below this floor are discarded.

    Returns
    -------
    p : TrigPoly
        Normalised so that the constant 1 gives coeff(0) == 1. Real samples
        produce an exactly Hermitian result flagged real.
    """
    samples = np.asarray(samples)
    dim = samples.ndim
    real = not np.iscomplexobj(samples) or not np.any(samples.imag)
    box = analyze_dense(samples.astype(complex), dim, cutoff)
    if real:
        box = 0.5 * (box + np.conj(box[(slice(None, None, -1),) * dim]))
    return TrigPoly.from_dense(box, dim, strip_width, real=real, drop_below=drop_below)


def evaluate(p: TrigPoly, theta: Union[Number, Sequence[Number]]) -> complex:
    """Value of p at a real or complex point with |Im theta| inside the strip"""
    theta = np.atleast_1d(np.asarray(theta, dtype=complex))
    if theta.shape != (p.dim,):
        raise ValueError(f"point of shape {theta.shape} does not match dimension {p.dim}")
    height = float(np.max(np.abs(theta.imag)))
    if height > p.strip_width + STRIP_SLACK:
        raise StripError(f"|Im theta| = {height} exceeds strip width {p.strip_width}")
    total = 0j
    for k, value in p.coeffs.items():
        total += value * np.exp(1j * np.dot(k, theta))
    return complex(total)


def evaluate_along(p: TrigPoly, omega: Sequence[float], times: np.ndarray) -> np.ndarray:
    """p(omega t) for an array of real times"""
    if p.is_zero():
        return np.zeros(np.shape(times), dtype=complex)
    modes = np.array(list(p.coeffs.keys()), dtype=float)
    values = np.array(list(p.coeffs.values()))
    frequencies = modes @ np.atleast_1d(np.asarray(omega, dtype=float))
    return np.exp(1j * np.multiply.outer(np.asarray(times, dtype=float), frequencies)) @ values


def evaluate_grid(p: TrigPoly, size: int) -> np.ndarray:
    """Values of p on the uniform grid with ``size`` points per dimension"""
    return synthesize_dense(p.to_dense(), p.dim, size)


def strip_norm(p: TrigPoly, width: Optional[float] = None) -> float:
    """sum_k |c_k| e^{|k|_1 width}, with width defaulting to the declared strip"""
    width = p.strip_width if width is None else width
    if width > p.strip_width + STRIP_SLACK:
        raise StripError(f"norm width {width} exceeds strip width {p.strip_width}")
    return float(sum(abs(v) * np.exp(l1(k) * width) for k, v in p.coeffs.items()))


def product(p: TrigPoly, q: TrigPoly) -> TrigPoly:
    """Exact product by direct convolution of the coefficient boxes"""
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch {p.dim} != {q.dim}")
    cutoff = p.cutoff + q.cutoff
    strip_width = min(p.strip_width, q.strip_width)
    real = p.real and q.real
    if p.is_zero() or q.is_zero():
        return TrigPoly(p.dim, {}, cutoff, strip_width, real=True)
    box = signal.convolve(p.to_dense(), q.to_dense(), mode="full", method="direct")
    result = TrigPoly.from_dense(box, p.dim, strip_width, real=real)
    if real:
        result = result.real_part()
    return result


def truncate(p: TrigPoly, cutoff: int) -> Tuple[TrigPoly, TrigPoly]:
    """Split p into (modes with |k|_1 <= cutoff, the rest); low + tail == p"""
    low = {k: v for k, v in p.coeffs.items() if l1(k) <= cutoff}
    tail = {k: v for k, v in p.coeffs.items() if l1(k) > cutoff}
    return (
        TrigPoly(p.dim, low, min(cutoff, p.cutoff), p.strip_width, real=p.real),
        TrigPoly(p.dim, tail, p.cutoff, p.strip_width, real=p.real),
    )
