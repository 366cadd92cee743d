"""
Configuration loader for twf
Merges YAML defaults, TWF_ environment variables and command-line flags into a SuiteConfig.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from src.config.schemas import SuiteConfig
from src.config.settings import CONFIG_DIR, CONFIG_FILE_NAME, ENV_PREFIX

logger = logging.getLogger(__name__)

# environment variable suffix -> SuiteConfig field
_ENV_FIELDS = {
    "M": "M",
    "MAX_WEIGHT": "max_weight",
    "WINDOW": "window",
    "SEED": "seed",
    "JOBS": "jobs",
    "MAX_CASES": "max_cases",
    "CACHE_SIZE": "cache_size",
}


class ConfigLoader:
    """simplified config loader - load yaml file to dict"""

    def __init__(self, config_dir: str = CONFIG_DIR):
        self.config_dir = Path(config_dir)

    def load_yaml(self, config_file: Optional[str] = None) -> Dict[str, Any]:
        """load suite defaults from yaml; an explicit path must exist, the default file is optional"""
        if config_file is not None:
            path = Path(config_file)
            if not path.exists():
                raise FileNotFoundError(f"Configuration file not found: {path}")
        else:
            path = self.config_dir / CONFIG_FILE_NAME
            if not path.exists():
                return {}

        with open(path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f) or {}

        if not isinstance(config, dict):
            raise ValueError(f"Configuration file {path} must hold a mapping")
        logger.debug(f"Loaded configuration from {path}")
        return config.get("suite", config)

    @staticmethod
    def load_env(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
        environ = os.environ if environ is None else environ
        values = {}
        for suffix, field in _ENV_FIELDS.items():
            raw = environ.get(f"{ENV_PREFIX}{suffix}")
            if raw is not None and raw != "":
                values[field] = raw
        return values

    def build(
        self,
        flags: Optional[Dict[str, Any]] = None,
        config_file: Optional[str] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> SuiteConfig:
        """flags > environment > yaml > defaults"""
        merged: Dict[str, Any] = {}
        merged.update(self.load_yaml(config_file))
        merged.update(self.load_env(environ))
        merged.update({k: v for k, v in (flags or {}).items() if v is not None})
        return SuiteConfig(**merged)


# global config loader instance
_config_loader: Optional[ConfigLoader] = None


def get_config_loader() -> ConfigLoader:
    """get global config loader instance"""
    global _config_loader
    if _config_loader is None:
        _config_loader = ConfigLoader()
    return _config_loader


def load_suite_config(flags: Optional[Dict[str, Any]] = None, config_file: Optional[str] = None) -> SuiteConfig:
    """convenient function - build the run configuration"""
    return get_config_loader().build(flags, config_file)
