"""
Configuration package
"""

from .loader import ConfigurationLoader, get_configuration_summary, load_configuration, read_toml
from .settings import Settings, get_settings, reset_settings

__all__ = [
    "get_settings",
    "reset_settings",
    "Settings",
    "ConfigurationLoader",
    "load_configuration",
    "get_configuration_summary",
    "read_toml",
]
