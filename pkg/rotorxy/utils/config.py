"""
Configuration management for rotorxy.

Supports loading configuration from:
1. YAML or JSON configuration file (``--config FILE``, else rotorxy.yaml)
2. Environment variables (prefixed with ROTORXY_)
3. Command-line flags (highest priority, applied by the CLI)

Configuration hierarchy (highest to lowest priority):
    Flags > Environment variables > Config file > Defaults
"""

from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from rotorxy.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "rotorxy.yaml"


@dataclass
class MCConfig:
    """Defaults for Monte Carlo chains. ``size`` and ``temperature`` stand in for the flags."""
    size: int | None = None
    temperature: float | None = None
    sweeps: int = 100_000
    therm: int | None = None
    stride: int = 2
    algorithm: str = "metropolis+overrelax"
    width: float = 1.0
    seed: int = 0


@dataclass
class SweepConfig:
    """Temperature grid of ``stiffness-sweep``."""
    tmin: float | None = None
    tmax: float | None = None
    steps: int = 25


@dataclass
class ExactConfig:
    """Exact evaluators: cutoff convergence, transfer state budget and quadrature grid."""
    tolerance: float = 1e-10
    max_states: int = 60_000
    quad_grid: int = 96


@dataclass
class ResilienceConfig:
    sigma_min: float = 0.1
    sigma_max: float = 1.2
    steps: int = 23
    sigma_c: float = 0.89
    phi_grid: int = 256
    quad_epsabs: float = 1e-8


@dataclass
class OutputConfig:
    out_dir: str = "results"
    svg: bool = False


@dataclass
class LoggingConfig:
    level: str = "INFO"


@dataclass
class RotorXYConfig:
    """Top-level configuration."""
    mc: MCConfig = field(default_factory=MCConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    exact: ExactConfig = field(default_factory=ExactConfig)
    resilience: ResilienceConfig = field(default_factory=ResilienceConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    workers: int = 1

    @classmethod
    def load(cls, config_path: str | Path | None = None) -> RotorXYConfig:
        """
        Load configuration from file and environment variables.

        Args:
            config_path: Path to a YAML or JSON file. If None, 'rotorxy.yaml' in the
                         current directory is used when present.

        Returns:
            A fully resolved RotorXYConfig instance.

        Raises:
            ConfigError: If an explicit file is missing, or any file is malformed.
        """
        config = cls()

        if config_path is None:
            path = Path(DEFAULT_CONFIG_FILE)
            if path.exists():
                config = _load_file(path, config)
        else:
            path = Path(config_path)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            config = _load_file(path, config)

        return _apply_env_overrides(config)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def write_sample(self, path: str | Path) -> Path:
        """Write a commented YAML sample holding these values."""
        target = Path(path)
        body = yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)
        target.write_text(SAMPLE_HEADER + body, encoding="utf-8")
        return target


SAMPLE_HEADER = """\
# rotorxy configuration
# Values here replace the built-in defaults; ROTORXY_* environment variables and
# command-line flags take precedence over this file.
#
# mc.algorithm: metropolis | metropolis+overrelax | wolff
# mc.size, mc.temperature: used when --size / --temp are not given
# mc.therm: null means 10% of the sweeps, at least 1000
# sweep.tmin, sweep.tmax, sweep.steps: stiffness-sweep grid when the flags are not given
# exact.max_states: largest transfer-matrix state space before giving up
# resilience.sigma_min, sigma_max, steps: lambda-sweep noise grid
# resilience.sigma_c: noise width above which rho_s = 0 in thermodynamic mode
# resilience.quad_epsabs: absolute tolerance of the Gaussian-weight quadrature
"""


def _update_section(section: Any, name: str, values: Any) -> None:
    if not isinstance(values, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    known = {f.name: str(f.type) for f in fields(section)}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown key '{name}.{key}'")
        if isinstance(value, str) and "float" in known[key]:
            # YAML reads exponents without a dot, such as 1e-06, as strings
            try:
                value = float(value)
            except ValueError as exc:
                raise ConfigError(f"'{name}.{key}' must be a number, got {value!r}") from exc
        setattr(section, key, value)


def _load_file(path: Path, config: RotorXYConfig) -> RotorXYConfig:
    """Merge a YAML (or JSON, which YAML parses) file into ``config``."""
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a mapping")

    for key, value in data.items():
        if key == "workers":
            config.workers = int(value)
        elif key in ("mc", "sweep", "exact", "resilience", "output", "logging"):
            _update_section(getattr(config, key), key, value)
        else:
            raise ConfigError(f"unknown config section '{key}'")

    logger.info("Loaded config from %s", path)
    return config


def _apply_env_overrides(config: RotorXYConfig) -> RotorXYConfig:
    """Override configuration with environment variables."""
    try:
        if val := os.environ.get("ROTORXY_OUT_DIR"):
            config.output.out_dir = val
        if val := os.environ.get("ROTORXY_WORKERS"):
            config.workers = int(val)
        if val := os.environ.get("ROTORXY_SEED"):
            config.mc.seed = int(val)
    except ValueError as exc:
        raise ConfigError(f"bad ROTORXY_* environment value: {exc}") from exc
    if val := os.environ.get("ROTORXY_LOG_LEVEL"):
        config.logging.level = val

    return config
