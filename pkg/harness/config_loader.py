"""
Config Loader - Reads experiment YAML files and applies overrides
Precedence: CLI flags > SEMCOM_* environment variables > YAML file > defaults
"""

import os
from typing import Any, Dict, Optional

import yaml

from core.errors import ConfigurationError

from .experiment import ExperimentConfig

ENV_OVERRIDES = {
    "SEMCOM_WORKERS": ("workers", int),
    "SEMCOM_OUTPUT_DIR": ("output_dir", str),
    "SEMCOM_MASTER_SEED": ("master_seed", int),
}

# Cache for parsed YAML files (loaded once per path)
_YAML_CACHE: Dict[str, Dict[str, Any]] = {}


def load_yaml(path: str) -> Dict[str, Any]:
    """
    Load an experiment YAML file (cached after the first read).

    Raises:
        ConfigurationError: If the file is missing or not a mapping
    """
    path = os.path.abspath(path)
    if path in _YAML_CACHE:
        return dict(_YAML_CACHE[path])
    if not os.path.exists(path):
        raise ConfigurationError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a mapping at the top level")
    _YAML_CACHE[path] = data
    return dict(data)


def env_overrides() -> Dict[str, Any]:
    overrides = {}
    for var, (key, cast) in ENV_OVERRIDES.items():
        value = os.getenv(var)
        if value:
            try:
                overrides[key] = cast(value)
            except ValueError as exc:
                raise ConfigurationError(f"{var}={value!r} is not a valid {cast.__name__}") from exc
    return overrides


def load_experiment_config(path: Optional[str] = None,
                           overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    data = load_yaml(path) if path else {}
    data.update(env_overrides())
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.model_validate(data)
