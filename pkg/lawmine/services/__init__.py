"""
Service layer: structured logging and in-process metrics shared by every lawmine module.
"""

from .logger_service import configure_logging, get_logger, handle_exceptions, log_execution_time
from .monitoring_service import get_monitoring_service

__all__ = [
    "configure_logging",
    "get_logger",
    "get_monitoring_service",
    "handle_exceptions",
    "log_execution_time",
]
