"""
Landau KAM
Reducibility of the Landau Hamiltonian under a quasi-periodically modulated magnetic field
"""

from .constants import a_omega, a_series, c_omega, chi1_landau, chi1_symmetric, constants_table, d_omega, g_omega
from .errors import (
    ConfigError,
    DegenerateNormalFormError,
    DivergenceError,
    LandauKamError,
    ResonanceError,
)
from .homological import DiophantineParams, diophantine_check, solve_homological
from .kam import (
    KamResult,
    KamSettings,
    Status,
    kam_reduce,
    kam_reduce_nondegenerate,
    kam_step,
    make_schedule,
    reduce_symmetric,
    symmetric_second_step,
)
from .oracle import (
    GaugeSpec,
    boundedness_metric,
    drift_rate,
    fundamental_matrix,
    integrate_flow,
    measure_excluded,
    rotation_numbers,
)
from .quadham import Gauge, NormalForm, QuadHamiltonian, build_landau, build_problem, build_symmetric
from .trigpoly import TrigPoly, evaluate, fourier_analyze, product, strip_norm, truncate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateNormalFormError",
    "DiophantineParams",
    "DivergenceError",
    "Gauge",
    "GaugeSpec",
    "KamResult",
    "KamSettings",
    "LandauKamError",
    "NormalForm",
    "QuadHamiltonian",
    "ResonanceError",
    "Status",
    "TrigPoly",
    "a_omega",
    "a_series",
    "boundedness_metric",
    "build_landau",
    "build_problem",
    "build_symmetric",
    "c_omega",
    "chi1_landau",
    "chi1_symmetric",
    "constants_table",
    "d_omega",
    "diophantine_check",
    "drift_rate",
    "evaluate",
    "fourier_analyze",
    "fundamental_matrix",
    "g_omega",
    "integrate_flow",
    "kam_reduce",
    "kam_reduce_nondegenerate",
    "kam_step",
    "make_schedule",
    "measure_excluded",
    "product",
    "reduce_symmetric",
    "rotation_numbers",
    "solve_homological",
    "strip_norm",
    "symmetric_second_step",
    "truncate",
]
