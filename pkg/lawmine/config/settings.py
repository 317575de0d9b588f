"""
Environment-based configuration
"""

import os
from typing import Any, Dict, Optional

_TRUTHY = ("true", "1", "yes")


def _flag(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in _TRUTHY


class Settings:
    """Configuration class using LAWMINE_* environment variables"""

    def __init__(self):
        # Environment
        self.environment = os.getenv("LAWMINE_ENVIRONMENT", "development").lower()
        self.debug = _flag("LAWMINE_DEBUG", "false")

        # Logging and metrics
        self.log_level = os.getenv("LAWMINE_LOG_LEVEL", "INFO")
        self.log_format = os.getenv("LAWMINE_LOG_FORMAT", "json")
        self.metrics_enabled = _flag("LAWMINE_METRICS_ENABLED", "true")

        # Execution
        self.workers = int(os.getenv("LAWMINE_WORKERS", str(os.cpu_count() or 1)))
        self.atom_budget = int(os.getenv("LAWMINE_ATOM_BUDGET", "10000"))

        # Learning defaults
        self.arity = int(os.getenv("LAWMINE_ARITY", "3"))
        self.batch_size = int(os.getenv("LAWMINE_BATCH_SIZE", "256"))
        self.max_iterations = int(os.getenv("LAWMINE_MAX_ITERATIONS", "8"))
        self.seed = int(os.getenv("LAWMINE_SEED", "0"))
        self.nominal_threshold = int(os.getenv("LAWMINE_NOMINAL_THRESHOLD", "32"))

        # Certification defaults
        self.cert_n = int(os.getenv("LAWMINE_CERT_N", "1000"))
        self.confidence = float(os.getenv("LAWMINE_CONFIDENCE", "0.95"))
        self.cert_rounds = int(os.getenv("LAWMINE_CERT_ROUNDS", "3"))

    def validate(self) -> None:
        """Validate configuration settings"""
        errors = []

        if self.log_format.lower() not in ("json", "text"):
            errors.append(f"LAWMINE_LOG_FORMAT must be 'json' or 'text', got {self.log_format!r}")

        if self.workers < 1:
            errors.append(f"LAWMINE_WORKERS must be positive, got {self.workers}")

        if self.atom_budget < 1:
            errors.append(f"LAWMINE_ATOM_BUDGET must be positive, got {self.atom_budget}")

        if self.arity < 1:
            errors.append(f"LAWMINE_ARITY must be at least 1, got {self.arity}")

        if self.batch_size < 1:
            errors.append(f"LAWMINE_BATCH_SIZE must be positive, got {self.batch_size}")

        if self.max_iterations < 1:
            errors.append(f"LAWMINE_MAX_ITERATIONS must be positive, got {self.max_iterations}")

        if self.nominal_threshold < 1:
            errors.append(f"LAWMINE_NOMINAL_THRESHOLD must be positive, got {self.nominal_threshold}")

        if self.cert_n < 1:
            errors.append(f"LAWMINE_CERT_N must be positive, got {self.cert_n}")

        if not 0.0 < self.confidence < 1.0:
            errors.append(f"LAWMINE_CONFIDENCE must lie in (0, 1), got {self.confidence}")

        if self.cert_rounds < 1:
            errors.append(f"LAWMINE_CERT_ROUNDS must be positive, got {self.cert_rounds}")

        if errors:
            raise ValueError("Configuration validation failed:\n" + "\n".join(errors))

    def get_environment_info(self) -> Dict[str, Any]:
        """Get environment information"""
        return {
            "environment": self.environment,
            "debug": self.debug,
            "logging": {"level": self.log_level, "format": self.log_format},
            "execution": {"workers": self.workers, "atom_budget": self.atom_budget},
            "learning": {
                "arity": self.arity,
                "batch_size": self.batch_size,
                "max_iterations": self.max_iterations,
                "seed": self.seed,
                "nominal_threshold": self.nominal_threshold,
            },
            "certification": {"n": self.cert_n, "confidence": self.confidence, "rounds": self.cert_rounds},
        }


def load_settings() -> Settings:
    """Load and validate settings"""
    settings = Settings()
    settings.validate()
    return settings


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get global settings instance"""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next call re-reads the environment"""
    global _settings
    _settings = None
