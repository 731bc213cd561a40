"""
Run configuration loaded from YAML and validated with pydantic
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.errors import ConfigError

DEFAULT_CONFIG_PATH = 'config/experiment_config.yaml'
OUTPUT_DIR_ENV = 'SHOCK_TASEP_OUTPUT_DIR'


class ShockConfig(BaseModel):
    """Densities of the shock, 0 < lam < rho < 1"""

    model_config = ConfigDict(extra='forbid')

    lam: float = 0.25
    rho: float = 0.75

    @model_validator(mode='after')
    def _ordered(self) -> 'ShockConfig':
        if not 0.0 < self.lam < self.rho < 1.0:
            raise ValueError(f"need 0 < lam < rho < 1, got lam={self.lam}, rho={self.rho}")
        return self


class WindowConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kappa: float = Field(3.0, gt=0)
    margin: int = Field(50, ge=0)
    guard_fraction: float = Field(0.5, ge=0)


class ExperimentConfig(BaseModel):
    """
    Parameters of one experiment

    Grids are interpreted per experiment: t_grid always lists observation
    times, tau_grid/s_grid are the scaling variables of the shock window,
    x_grid lists observation sites relative to the shock.
    """

    model_config = ConfigDict(extra='forbid')

    name: str
    enabled: bool = True
    initial_data: Literal['shock', 'bernoulli'] = 'shock'
    shock: ShockConfig = Field(default_factory=ShockConfig)
    window: WindowConfig = Field(default_factory=WindowConfig)
    t_grid: List[float] = Field(default_factory=lambda: [100.0])
    tau_grid: List[float] = Field(default_factory=lambda: [0.0])
    s_grid: List[float] = Field(default_factory=lambda: [0.0])
    x_grid: List[int] = Field(default_factory=lambda: [0])
    u_grid: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0])
    epsilons: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    n_samples: int = Field(100, ge=0)
    seed_base: int = 0
    nu: float = 0.8
    alpha: float = 0.0
    workers: int = Field(1, ge=1)
    ctmc_runs: int = Field(0, ge=0)
    ctmc_time: float = Field(0.7, gt=0)
    ctmc_initial: str = '0:3|2*o 2*.'
    order: int = Field(60, ge=4)
    xi_grid: List[float] = Field(default_factory=lambda: [-2.0, 0.0, 2.0, 5.0])
    s_range: Tuple[float, float, float] = (-8.0, 8.0, 0.01)
    thresholds: Dict[str, float] = Field(default_factory=dict)

    @field_validator('t_grid')
    @classmethod
    def _positive_times(cls, value: List[float]) -> List[float]:
        if not value or any(t <= 0 for t in value):
            raise ValueError("t_grid must be a nonempty list of positive times")
        return sorted(value)

    @field_validator('s_range')
    @classmethod
    def _s_range(cls, value: Tuple[float, float, float]) -> Tuple[float, float, float]:
        start, stop, step = value
        if not (stop > start and step > 0):
            raise ValueError(f"s_range must be (start, stop, step) with stop > start and step > 0, got {value}")
        return value

    @field_validator('nu')
    @classmethod
    def _nu_range(cls, value: float) -> float:
        if not 2.0 / 3.0 < value < 1.0:
            raise ValueError(f"nu must lie in (2/3, 1), got {value}")
        return value

    @field_validator('alpha')
    @classmethod
    def _alpha_range(cls, value: float) -> float:
        if not -1.0 < value < 1.0:
            raise ValueError(f"alpha must lie in (-1, 1), got {value}")
        return value

    def threshold(self, key: str) -> float:
        if key not in self.thresholds:
            raise ConfigError(f"experiment {self.name!r} has no threshold {key!r}")
        return self.thresholds[key]


class RunConfig(BaseModel):
    """A whole configuration file: output placement plus one block per experiment"""

    model_config = ConfigDict(extra='forbid')

    output_dir: str = 'output'
    log_level: str = 'INFO'
    experiments: Dict[str, ExperimentConfig] = Field(default_factory=dict)

    @model_validator(mode='before')
    @classmethod
    def _name_blocks(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get('experiments'), dict):
            data = dict(data)
            data['experiments'] = {
                key: {'name': key, **(block or {})} for key, block in data['experiments'].items()
            }
        return data

    def experiment(self, key: str) -> ExperimentConfig:
        if key not in self.experiments:
            raise ConfigError(f"configuration has no experiment block {key!r}")
        return self.experiments[key]

    def resolved_output_dir(self) -> Path:
        """SHOCK_TASEP_OUTPUT_DIR wins over the file's output_dir"""
        return Path(os.getenv(OUTPUT_DIR_ENV) or self.output_dir)


def parse_config(data: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data or {})
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def load_config(path: Union[str, Path] = DEFAULT_CONFIG_PATH) -> RunConfig:
    """
    Load and validate a YAML run configuration

    Raises:
        ConfigError: missing file, malformed YAML or failed validation
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed YAML in {path}: {e}") from e
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"configuration root in {path} must be a mapping")
    return parse_config(data)
