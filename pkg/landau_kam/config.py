"""
Experiment configuration
YAML files validated by pydantic models, with built-in defaults per command
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .homological import DiophantineParams
from .kam import KamSettings
from .oracle import MIN_MEASURE_SAMPLES
from .quadham import Gauge
from .trigpoly import TrigPoly

logger = logging.getLogger(__name__)

COMMANDS = ("constants", "reduce", "landau-growth", "symmetric-bounded", "measure")
Command = Literal["constants", "reduce", "landau-growth", "symmetric-bounded", "measure"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ForcingConfig(_Strict):
    """f(theta): a sine, a cosine or explicit Fourier modes [k, re, im]"""
    kind: Literal["sine", "cosine", "modes"] = "sine"
    amplitude: float = 1.0
    direction: List[int] = Field(default_factory=lambda: [1])
    modes: List[Tuple[List[int], float, float]] = Field(default_factory=list)
    strip_width: float = Field(1.0, gt=0)

    @property
    def dim(self) -> int:
        if self.kind == "modes" and self.modes:
            return len(self.modes[0][0])
        return len(self.direction)

    def build(self) -> TrigPoly:
        if self.kind == "sine":
            return TrigPoly.sine(self.direction, self.amplitude, self.strip_width)
        if self.kind == "cosine":
            return TrigPoly.cosine(self.direction, self.amplitude, self.strip_width)
        if not self.modes:
            raise ConfigError("forcing kind 'modes' needs at least one mode")
        coeffs = {tuple(k): complex(re, im) for k, re, im in self.modes}
        return TrigPoly.from_modes(coeffs, self.dim, self.strip_width)


class ScheduleConfig(_Strict):
    sigma0: float = Field(1.0, gt=0)
    max_steps: int = Field(12, ge=1)
    stop_tol: float = Field(1e-13, gt=0)
    kappa_scale: float = Field(0.5, gt=0)
    max_modes: int = Field(16, ge=1)
    oversample: int = Field(2, ge=1)
    nu2_constant: float = Field(0.5, gt=0)
    nondegeneracy: float = Field(0.1, gt=0)
    patience: int = Field(3, ge=1)
    max_generator_norm: float = Field(10.0, gt=0)
    noise_floor: float = Field(1e-14, ge=0)
    diophantine_gamma: Optional[float] = Field(None, gt=0)
    diophantine_tau: float = Field(2.0, gt=0)
    diophantine_cutoff: int = Field(50, ge=1)

    def to_settings(self) -> KamSettings:
        screen = None
        if self.diophantine_gamma is not None:
            screen = DiophantineParams(self.diophantine_gamma, self.diophantine_tau)
        return KamSettings(
            sigma0=self.sigma0,
            max_steps=self.max_steps,
            stop_tol=self.stop_tol,
            kappa_scale=self.kappa_scale,
            max_modes=self.max_modes,
            oversample=self.oversample,
            nu2_constant=self.nu2_constant,
            nondegeneracy=self.nondegeneracy,
            patience=self.patience,
            max_generator_norm=self.max_generator_norm,
            noise_floor=self.noise_floor,
            diophantine=screen,
            diophantine_cutoff=self.diophantine_cutoff,
        )


class OracleConfig(_Strict):
    horizon: float = Field(2000.0, gt=0)
    dt: Optional[float] = Field(None, gt=0)
    samples_per_period: int = Field(32, ge=1)
    p1: float = 1.0
    write_trajectory: bool = False


class MeasureConfig(_Strict):
    samples: int = Field(MIN_MEASURE_SAMPLES, ge=MIN_MEASURE_SAMPLES)


class OutputConfig(_Strict):
    directory: str = "results"
    write_generator: bool = True


class ExperimentConfig(_Strict):
    command: Command
    gauge: Gauge = Gauge.LANDAU
    B0: float = Field(1.0, gt=0)
    epsilons: List[float] = Field(default_factory=lambda: [0.1], min_length=1)
    omegas: List[List[float]] = Field(default_factory=lambda: [[1.0]], min_length=1)
    seed: int = 0
    jobs: int = Field(1, ge=1)
    forcing: ForcingConfig = Field(default_factory=ForcingConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    measure: MeasureConfig = Field(default_factory=MeasureConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @field_validator("omegas", mode="before")
    @classmethod
    def _wrap_scalars(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [[w] if isinstance(w, (int, float)) else w for w in value]
        return value

    @field_validator("epsilons")
    @classmethod
    def _check_epsilons(cls, value: List[float]) -> List[float]:
        for epsilon in value:
            if not 0.0 <= epsilon < 1.0:
                raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
        return value

    @field_validator("omegas")
    @classmethod
    def _check_omegas(cls, value: List[List[float]]) -> List[List[float]]:
        if len({len(w) for w in value}) != 1:
            raise ValueError("every frequency vector must have the same length")
        return value

    def check_dimensions(self) -> None:
        if len(self.omegas[0]) != self.forcing.dim:
            raise ConfigError(
                f"frequency vectors have length {len(self.omegas[0])} but the forcing lives on T^{self.forcing.dim}"
            )


DEFAULTS: Dict[str, Dict[str, Any]] = {
    "constants": {"omegas": [0.5, 1.0, 1.5, 2.5, 3.0, 5.0]},
    "reduce": {"gauge": "landau", "epsilons": [0.1, 0.05], "omegas": [1.0]},
    "landau-growth": {"gauge": "landau", "epsilons": [0.1], "omegas": [1.0], "oracle": {"horizon": 2000.0}},
    "symmetric-bounded": {"gauge": "symmetric", "epsilons": [0.1], "omegas": [3.0], "oracle": {"horizon": 20000.0}},
    "measure": {"gauge": "landau", "epsilons": [0.2, 0.1, 0.05, 0.02]},
}


def default_config(command: str) -> ExperimentConfig:
    """Built-in configuration of a command"""
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    return parse_config({"command": command, **DEFAULTS[command]})


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
    config.check_dimensions()
    return config


def load_config(path: Optional[Union[str, Path]], command: Optional[str] = None) -> ExperimentConfig:
    """
    Read a YAML experiment file.

    Args:
        path: YAML file, or None for the built-in defaults of ``command``
        command: Subcommand; fills or must match the file's ``command`` key

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: the file is missing, unreadable or invalid
    """
    if path is None:
        if command is None:
            raise ConfigError("either a config path or a command is required")
        logger.info(f"No config file given, using defaults for {command}")
        return default_config(command)
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError as e:
        raise ConfigError(f"config file {path} not found") from e
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    if command is not None:
        declared = data.setdefault("command", command)
        if declared != command:
            raise ConfigError(f"config file {path} is for {declared!r}, not {command!r}")
    return parse_config(data)
