#!/usr/bin/env python3
"""
Harness Configuration Utility

Centralized settings for the metric harness: comparison tolerances, the
zero-denominator fill policy, the Monte Carlo seed and display rounding.
Settings come from an optional JSON file overlaid with METRIC_HARNESS_*
environment variables.
"""

import os
import json
import logging
from dataclasses import dataclass, asdict, replace
from pathlib import Path
from typing import Dict, Any, Optional, List, Mapping

logger = logging.getLogger(__name__)

ENV_PREFIX = "METRIC_HARNESS_"
CONFIG_PATH_ENV = "METRIC_HARNESS_CONFIG"

FILL_POLICIES = ("undefined", "zero", "one", "drop")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _parse_bool(value: str) -> bool:
    return str(value).strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class HarnessSettings:
    """Harness-wide defaults"""
    tolerance: float = 1e-9
    stochastic_tolerance: float = 1e-6
    fill_policy: str = "undefined"
    seed: int = 42
    display_decimals: int = 2
    workers: int = 1
    mc_resamples: int = 9999
    log_level: str = "INFO"
    flag_average_ambiguity: bool = True

    def __post_init__(self):
        if self.tolerance < 0 or self.stochastic_tolerance < 0:
            raise ValueError("tolerance must be non-negative in harness configuration")
        if self.fill_policy not in FILL_POLICIES:
            raise ValueError(f"fill_policy must be one of {FILL_POLICIES}, got '{self.fill_policy}'")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.mc_resamples < 1:
            raise ValueError("mc_resamples must be at least 1")
        if self.display_decimals < 0:
            raise ValueError("display_decimals must be non-negative")
        if self.log_level.upper() not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of {LOG_LEVELS}")

    @classmethod
    def from_env_dict(cls, env: Mapping[str, Any], base: Optional["HarnessSettings"] = None) -> "HarnessSettings":
        """
        Create settings from a dictionary of environment-style strings

        Args:
            env: Mapping such as os.environ; only METRIC_HARNESS_* keys are read
            base: Settings to overlay; defaults are used when omitted

        Returns:
            HarnessSettings: New settings instance
        """
        current = base or cls()
        updates: Dict[str, Any] = {}
        converters = {
            "tolerance": float,
            "stochastic_tolerance": float,
            "fill_policy": lambda v: str(v).strip().lower(),
            "seed": int,
            "display_decimals": int,
            "workers": int,
            "mc_resamples": int,
            "log_level": lambda v: str(v).strip().upper(),
            "flag_average_ambiguity": _parse_bool,
        }
        for field_name, convert in converters.items():
            key = ENV_PREFIX + field_name.upper()
            if key in env and env[key] not in (None, ""):
                try:
                    updates[field_name] = convert(env[key])
                except (TypeError, ValueError) as e:
                    raise ValueError(f"{key} has an invalid value '{env[key]}': {e}")
        return replace(current, **updates) if updates else current

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "HarnessSettings":
        """Create settings from a JSON object, ignoring unknown keys with a warning"""
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning(f"⚠️ Ignoring unknown harness settings: {', '.join(unknown)}")
        return cls(**{k: v for k, v in data.items() if k in known})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class HarnessConfig:
    """
    Harness configuration manager

    Handles config file auto-detection, JSON loading and environment
    variable overlay.
    """

    def __init__(self, custom_path: Optional[str] = None, env: Optional[Mapping[str, str]] = None):
        """
        Initialize harness configuration manager

        Args:
            custom_path: Optional path to a JSON config file
            env: Environment mapping; defaults to os.environ
        """
        self._config_path: Optional[Path] = None
        self._env = os.environ if env is None else env
        self._settings = HarnessSettings()
        self._loaded = False

        if custom_path:
            self.set_config_path(custom_path)
        else:
            self.auto_detect_config_path()
        self.load_config()

    @property
    def config_path(self) -> Optional[Path]:
        """Get current config file path"""
        return self._config_path

    @property
    def settings(self) -> HarnessSettings:
        """Get effective settings (file values overlaid with environment)"""
        return self._settings

    @property
    def is_loaded(self) -> bool:
        """Check if a config file has been successfully loaded"""
        return self._loaded

    def set_config_path(self, path: str) -> bool:
        """
        Set custom config file path

        Args:
            path: Path to a JSON config file

        Returns:
            bool: True if path is valid and accessible
        """
        config_path = Path(path)
        if config_path.exists() and config_path.is_file():
            self._config_path = config_path
            self._loaded = False
            logger.info(f"Harness config path set to: {config_path}")
            return True
        logger.warning(f"Harness config path does not exist: {config_path}")
        return False

    def get_common_config_paths(self) -> List[Path]:
        """
        Get list of common config file locations

        Returns:
            List[Path]: Paths checked in order
        """
        return [
            Path.cwd() / "metric_harness.json",
            Path.home() / ".config" / "metric-harness" / "config.json",
        ]

    def auto_detect_config_path(self) -> bool:
        """
        Auto-detect config file location

        Returns:
            bool: True if a config file was found and set
        """
        env_path = self._env.get(CONFIG_PATH_ENV)
        if env_path:
            logger.debug(f"Using {CONFIG_PATH_ENV} environment variable: {env_path}")
            if self.set_config_path(env_path):
                return True

        for path in self.get_common_config_paths():
            if path.exists() and path.is_file():
                logger.debug(f"Found harness config at: {path}")
                self._config_path = path
                return True

        logger.debug("No harness config file found; using defaults and environment")
        return False

    def load_config(self) -> bool:
        """
        Load settings from the config file (if any) and overlay the environment

        Returns:
            bool: True if a config file was loaded
        """
        base = HarnessSettings()
        self._loaded = False
        if self._config_path:
            try:
                with open(self._config_path, "r", encoding="utf-8") as f:
                    raw = json.load(f)
                section = raw.get("harness", raw) if isinstance(raw, dict) else {}
                base = HarnessSettings.from_mapping(section)
                self._loaded = True
                logger.info(f"✅ Loaded harness settings from {self._config_path}")
            except FileNotFoundError:
                logger.error(f"❌ Harness config file not found: {self._config_path}")
            except json.JSONDecodeError as e:
                logger.error(f"❌ Invalid JSON in harness config: {e}")
        self._settings = HarnessSettings.from_env_dict(self._env, base=base)
        return self._loaded

    def get_config_summary(self) -> Dict[str, Any]:
        """
        Get summary of current configuration

        Returns:
            Dict[str, Any]: Configuration summary
        """
        return {
            "config_path": str(self._config_path) if self._config_path else None,
            "loaded": self._loaded,
            "env_overrides": sorted(k for k in self._env if k.startswith(ENV_PREFIX) and k != CONFIG_PATH_ENV),
            "settings": self._settings.to_dict(),
        }


# Global instance for easy access
_global_harness_config: Optional[HarnessConfig] = None


def get_harness_config(custom_path: Optional[str] = None) -> HarnessConfig:
    """
    Get global harness configuration instance

    Args:
        custom_path: Optional custom path to a JSON config file

    Returns:
        HarnessConfig: Global configuration instance
    """
    global _global_harness_config

    if _global_harness_config is None or custom_path:
        _global_harness_config = HarnessConfig(custom_path)

    return _global_harness_config


def load_harness_settings(custom_path: Optional[str] = None) -> HarnessSettings:
    """
    Convenience function returning the effective settings

    Args:
        custom_path: Optional custom path to a JSON config file

    Returns:
        HarnessSettings: Effective settings
    """
    return get_harness_config(custom_path).settings
