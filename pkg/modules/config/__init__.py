"""
Configuration module for the metric harness

Provides centralized settings management: config file detection, JSON
loading and METRIC_HARNESS_* environment overrides.
"""

from .harness_config import HarnessSettings, HarnessConfig, get_harness_config, load_harness_settings

__all__ = ['HarnessSettings', 'HarnessConfig', 'get_harness_config', 'load_harness_settings']
