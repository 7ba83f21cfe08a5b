"""
Configuration Loader

Handles loading configuration from an optional YAML file and merging
environment variable overrides on top of it.

Author: CapMap Project
License: MIT
"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from .schema import Config
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = "capmap.yaml"

# (environment variable, section, key, converter)
ENV_OVERRIDES = [
    ("CAPMAP_LOG_LEVEL", "app", "log_level", str),
    ("CAPMAP_SEED", "fit", "seed", int),
    ("CAPMAP_MAX_ITERATIONS", "fit", "max_iterations", int),
    ("CAPMAP_LEARNING_RATE", "fit", "learning_rate", float),
    ("CAPMAP_GEOMETRY", "geometry", "kind", str),
    ("CAPMAP_DIM", "geometry", "dim", int),
    ("CAPMAP_WORKERS", "evaluation", "workers", int),
]


class ConfigLoader:
    """
    Configuration loader.

    Loads configuration from YAML, merges environment variables and
    validates the result into a Config object.
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize the configuration loader.

        Args:
            config_path: Path to the configuration file. If None, uses
                CAPMAP_CONFIG or ./capmap.yaml.
        """
        load_dotenv()
        self.config_path = config_path or os.getenv("CAPMAP_CONFIG", DEFAULT_CONFIG_PATH)
        self._config: Optional[Config] = None

    def load(self) -> Config:
        """
        Load and validate configuration.

        Returns:
            Validated Config object

        Raises:
            ValueError: If YAML parsing or validation fails
        """
        config_data = self._load_yaml()
        config_data = self._merge_env_vars(config_data)
        self._config = Config(**config_data)
        return self._config

    def _load_yaml(self) -> Dict[str, Any]:
        """Load the YAML file, returning an empty mapping when it is absent."""
        config_file = Path(self.config_path)

        if not config_file.exists():
            logger.debug(f"No config file at {config_file}, using defaults")
            return {}

        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"Failed to parse YAML config: {e}")

        if not isinstance(data, dict):
            raise ValueError(f"Config root must be a mapping: {config_file}")
        return data

    def _merge_env_vars(self, config_data: Dict[str, Any]) -> Dict[str, Any]:
        """
        Merge environment variables into configuration.

        Environment variables override config file values.
        """
        for env_name, section, key, convert in ENV_OVERRIDES:
            raw = os.getenv(env_name)
            if raw is None or raw == "":
                continue
            try:
                value = convert(raw)
            except ValueError:
                raise ValueError(f"Invalid value for {env_name}: {raw!r}")
            config_data.setdefault(section, {})[key] = value
        return config_data

    def save(self, config: Config, path: Optional[str] = None) -> None:
        """
        Save configuration to YAML file.

        Args:
            config: Config object to save
            path: Path to save to (uses loader path if None)
        """
        save_path = Path(path or self.config_path)
        save_path.parent.mkdir(parents=True, exist_ok=True)

        with open(save_path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(config.model_dump(mode="json"), f, default_flow_style=False, sort_keys=False)

    @property
    def config(self) -> Optional[Config]:
        """Get the current configuration object."""
        return self._config


def load_config(config_path: Optional[str] = None) -> Config:
    """
    Convenience function to load configuration.

    Args:
        config_path: Optional path to config file

    Returns:
        Loaded and validated Config object
    """
    return ConfigLoader(config_path).load()
