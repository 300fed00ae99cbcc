"""
Exception hierarchy
Failure modes of the reduction engine and the exit codes they map to
"""

from typing import Dict, Optional, Tuple, Type


class LandauKamError(Exception):
    """Base class for every error raised by the engine"""


class ConfigError(LandauKamError):
    """Experiment configuration is missing, unreadable or invalid"""


class ResonanceError(LandauKamError):
    """A needed small divisor fell below its threshold"""

    def __init__(
        self,
        message: str,
        mode: Optional[Tuple[int, ...]] = None,
        monomial: Optional[str] = None,
        divisor: Optional[complex] = None,
        threshold: Optional[float] = None,
    ):
        super().__init__(message)
        self.mode = mode
        self.monomial = monomial
        self.divisor = divisor
        self.threshold = threshold


class DivergenceError(LandauKamError):
    """The iteration stopped contracting or produced an oversized generator"""


class ConsistencyError(LandauKamError):
    """Two independent evaluations of the same quantity disagree"""


class GridResolutionError(LandauKamError, ValueError):
    """Sample grid too coarse for the requested Fourier cutoff"""


class StripError(LandauKamError, ValueError):
    """Evaluation requested outside the analyticity strip"""


class StepSizeError(LandauKamError):
    """Integrator step does not resolve the dynamics"""


class GeneratorBranchError(LandauKamError):
    """Matrix logarithm ambiguous: an eigenvalue sits near -1"""


class DegenerateNormalFormError(LandauKamError):
    """Second normal-form frequency too small for the non-degenerate iteration"""


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESONANCE = 3
EXIT_DIVERGENCE = 4

EXIT_CODES: Dict[Type[LandauKamError], int] = {
    ConfigError: EXIT_CONFIG,
    ResonanceError: EXIT_RESONANCE,
    DegenerateNormalFormError: EXIT_RESONANCE,
    DivergenceError: EXIT_DIVERGENCE,
    GeneratorBranchError: EXIT_DIVERGENCE,
}


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit code (1 for anything unmapped)"""
    for error_type, code in EXIT_CODES.items():
        if isinstance(error, error_type):
            return code
    return 1
