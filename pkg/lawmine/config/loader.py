"""
Configuration loader: .env seeding, validated settings and TOML documents
"""

import logging
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional, Union

from lawmine.errors import ConfigurationError

from .settings import Settings

logger = logging.getLogger(__name__)


class ConfigurationLoader:
    """Configuration loader with validation and error reporting"""

    def __init__(self, env_file: Optional[str] = None):
        self.env_file = env_file or ".env"
        self._settings: Optional[Settings] = None

    def load_settings(self, validate: bool = True) -> Settings:
        """
        Load and validate settings

        Args:
            validate: Whether to perform validation (default: True)

        Returns:
            Settings: Validated settings object

        Raises:
            ConfigurationError: If configuration is invalid
        """
        try:
            if os.path.exists(self.env_file):
                if not os.access(self.env_file, os.R_OK):
                    raise ConfigurationError(f"Environment file {self.env_file} exists but is not readable")
                logger.debug(f"Loading configuration from {self.env_file}")
                self._load_env_file(self.env_file)

            settings = Settings()
            if validate:
                settings.validate()

            self._settings = settings
            return settings

        except ConfigurationError:
            raise
        except ValueError as e:
            raise ConfigurationError(str(e))
        except Exception as e:
            raise ConfigurationError(f"Failed to load configuration: {str(e)}")

    def _load_env_file(self, env_file_path: str):
        """Copy KEY=VALUE lines into the environment without overriding existing variables"""
        try:
            with open(env_file_path, "r", encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line or line.startswith("#") or "=" not in line:
                        continue
                    key, value = line.split("=", 1)
                    key = key.strip()
                    value = value.strip().strip('"').strip("'")
                    if key and not os.getenv(key):
                        os.environ[key] = value
        except OSError as e:
            raise ConfigurationError(f"Failed to load environment file {env_file_path}: {str(e)}")

    def get_settings(self) -> Optional[Settings]:
        """Get currently loaded settings"""
        return self._settings


def read_toml(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a TOML document (bias files, plant specs)"""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Configuration file {path} does not exist")
    try:
        with path.open("rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"Invalid TOML in {path}: {e}", {"file": str(path)})


def load_configuration(env_file: Optional[str] = None, validate: bool = True, exit_on_error: bool = False) -> Settings:
    """
    Load configuration with error handling

    Args:
        env_file: Path to environment file (optional)
        validate: Whether to perform validation
        exit_on_error: Exit with the usage status instead of raising

    Returns:
        Settings: Loaded configuration
    """
    loader = ConfigurationLoader(env_file)

    try:
        return loader.load_settings(validate=validate)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e.message}")
        if exit_on_error:
            sys.exit(2)
        raise


def get_configuration_summary(settings: Settings) -> str:
    """
    Generate a human-readable configuration summary

    Args:
        settings: Application settings

    Returns:
        str: Configuration summary
    """
    summary_lines = [
        f"Environment: {settings.environment}",
        f"Debug Mode: {settings.debug}",
        "",
        "Logging:",
        f"  Level: {settings.log_level}",
        f"  Format: {settings.log_format}",
        f"  Metrics Enabled: {settings.metrics_enabled}",
        "",
        "Learning:",
        f"  Arity: {settings.arity}",
        f"  Batch Size: {settings.batch_size}",
        f"  Max Iterations: {settings.max_iterations}",
        f"  Seed: {settings.seed}",
        f"  Workers: {settings.workers}",
        "",
        "Certification:",
        f"  Sample Size: {settings.cert_n}",
        f"  Confidence: {settings.confidence}",
        f"  Rounds: {settings.cert_rounds}",
        "",
        "Theory:",
        f"  Atom Budget: {settings.atom_budget}",
    ]

    return "\n".join(summary_lines)
