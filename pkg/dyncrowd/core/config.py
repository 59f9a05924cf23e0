"""
dyncrowd Configuration
======================

Handles engine configuration:
- EngineConfig defaults for every threshold and cadence parameter
- Validation with errors that name the offending field
- Flat YAML configuration files (read/write round trip)
"""

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from .exceptions import ConfigurationError
from .logging import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class EngineConfig:
    """
    Thresholds and cadence parameters of the dynamic clustering engine.

    ``coast_limit`` defaults to ``eval_period``; the two CTEO/CTEL thresholds
    default to half of ``d_th`` and half of ``theta_th``.
    """
    d_th: float = 120.0
    theta_th: float = 50.0
    eval_period: int = 10
    lof_contamination: float = 0.2
    lof_neighbor_fraction: float = 0.8
    temp_trigger: int = 5
    min_cmdd_members: int = 2
    coast_limit: Optional[int] = None
    error_threshold_T: Optional[float] = None
    direction_threshold_T: Optional[float] = None
    lof_heading_weight: float = 1.0
    lof_score_gate: float = 1.5
    retry_temporary: bool = True
    debug_checks: bool = False

    @property
    def resolved_coast_limit(self) -> int:
        return self.eval_period if self.coast_limit is None else self.coast_limit

    @property
    def location_threshold(self) -> float:
        """Location threshold T for CTEO/CTEL, pixels"""
        return 0.5 * self.d_th if self.error_threshold_T is None else self.error_threshold_T

    @property
    def direction_threshold(self) -> float:
        """Direction threshold T for CTEO/CTEL, degrees"""
        return 0.5 * self.theta_th if self.direction_threshold_T is None else self.direction_threshold_T

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


_INT_FIELDS = {"eval_period", "temp_trigger", "min_cmdd_members", "coast_limit"}
_BOOL_FIELDS = {"retry_temporary", "debug_checks"}
_OPTIONAL_FIELDS = {"coast_limit", "error_threshold_T", "direction_threshold_T"}


class ConfigValidator:
    """Configuration validation utilities"""

    @staticmethod
    def validate_type(value: Any, field_name: str) -> Optional[str]:
        """Validate field type"""
        if value is None:
            if field_name in _OPTIONAL_FIELDS:
                return None
            return f"{field_name} must not be empty"
        if field_name in _BOOL_FIELDS:
            if not isinstance(value, bool):
                return f"{field_name} must be true or false, got {type(value).__name__}"
            return None
        if isinstance(value, bool):
            return f"{field_name} must be a number, got bool"
        if field_name in _INT_FIELDS:
            if not isinstance(value, int):
                return f"{field_name} must be an integer, got {type(value).__name__}"
        elif not isinstance(value, (int, float)):
            return f"{field_name} must be a number, got {type(value).__name__}"
        return None

    @staticmethod
    def validate_positive(value: Union[int, float], field_name: str) -> Optional[str]:
        if value is not None and not value > 0:
            return f"{field_name} must be positive, got {value}"
        return None

    @staticmethod
    def validate_range(value: Union[int, float], min_val: float, max_val: float, field_name: str,
                       min_inclusive: bool = True) -> Optional[str]:
        """Validate numeric range"""
        if math.isnan(value):
            return f"{field_name} must be a number, got nan"
        below = value < min_val if min_inclusive else value <= min_val
        if below or value > max_val:
            left = "[" if min_inclusive else "("
            return f"{field_name} must be in {left}{min_val}, {max_val}], got {value}"
        return None


def validate_config(cfg: EngineConfig) -> EngineConfig:
    """
    Return ``cfg`` unchanged when every invariant holds.

    Raises:
        ConfigurationError: naming the first offending field
    """
    for f in fields(cfg):
        error = ConfigValidator.validate_type(getattr(cfg, f.name), f.name)
        if error:
            raise ConfigurationError(error, config_key=f.name, config_value=getattr(cfg, f.name))

    checks = [
        ("d_th", ConfigValidator.validate_positive(cfg.d_th, "d_th")),
        ("theta_th", ConfigValidator.validate_range(cfg.theta_th, 0, 180, "theta_th", min_inclusive=False)),
        ("eval_period", ConfigValidator.validate_range(cfg.eval_period, 1, float("inf"), "eval_period")),
        ("lof_contamination", ConfigValidator.validate_range(
            cfg.lof_contamination, 0, 0.5, "lof_contamination", min_inclusive=False)),
        ("lof_neighbor_fraction", ConfigValidator.validate_range(
            cfg.lof_neighbor_fraction, 0, 1, "lof_neighbor_fraction", min_inclusive=False)),
        ("temp_trigger", ConfigValidator.validate_range(cfg.temp_trigger, 1, float("inf"), "temp_trigger")),
        ("min_cmdd_members", ConfigValidator.validate_range(
            cfg.min_cmdd_members, 1, float("inf"), "min_cmdd_members")),
        ("coast_limit", None if cfg.coast_limit is None else ConfigValidator.validate_range(
            cfg.coast_limit, 1, float("inf"), "coast_limit")),
        ("error_threshold_T", ConfigValidator.validate_positive(cfg.error_threshold_T, "error_threshold_T")),
        ("direction_threshold_T", ConfigValidator.validate_positive(
            cfg.direction_threshold_T, "direction_threshold_T")),
        ("lof_heading_weight", ConfigValidator.validate_range(
            cfg.lof_heading_weight, 0, float("inf"), "lof_heading_weight")),
        ("lof_score_gate", ConfigValidator.validate_range(cfg.lof_score_gate, 0, float("inf"), "lof_score_gate")),
    ]
    for name, error in checks:
        if error:
            raise ConfigurationError(error, config_key=name, config_value=getattr(cfg, name))
    return cfg


def config_from_dict(data: Dict[str, Any]) -> EngineConfig:
    """Build a validated config from a flat mapping; unknown keys are errors."""
    known = {f.name for f in fields(EngineConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown config key '{unknown[0]}'", config_key=unknown[0])
    for name, value in data.items():
        error = ConfigValidator.validate_type(value, name)
        if error:
            raise ConfigurationError(error, config_key=name, config_value=value)
    return validate_config(EngineConfig(**data))


def read_config(path: Optional[PathLike] = None) -> EngineConfig:
    """
    Load an EngineConfig from a flat YAML file.

    An empty file, or no path at all, yields the defaults.
    """
    if path is None:
        return EngineConfig()
    config_path = Path(path)
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {config_path}: {e}", original_error=e)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"invalid YAML in {config_path}: {e}", original_error=e)

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {config_path} must hold a key-value mapping")

    cfg = config_from_dict(data)
    logger.debug("config_loaded", path=str(config_path), keys=sorted(data))
    return cfg


def write_config(cfg: EngineConfig, path: PathLike) -> Path:
    """Save every field of ``cfg`` so the file reads back to an equal config."""
    save_path = Path(path)
    save_path.parent.mkdir(parents=True, exist_ok=True)
    with open(save_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(cfg.to_dict(), f, default_flow_style=False, sort_keys=False)
    return save_path
