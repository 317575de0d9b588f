"""
Centralized logging service with structured logging, exception handling, and context management
"""

import json
import logging
import sys
import time
import traceback
from contextlib import contextmanager
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Dict, Optional

from lawmine.config.settings import get_settings
from lawmine.services.monitoring_service import get_monitoring_service


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


class StructuredFormatter(logging.Formatter):
    """One JSON object per line"""

    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            "timestamp": _utcnow(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        if hasattr(record, "extra_fields"):
            log_entry.update(record.extra_fields)

        if record.exc_info:
            log_entry["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": traceback.format_exception(*record.exc_info),
            }

        return json.dumps(log_entry, default=str)


class TextFormatter(logging.Formatter):
    """Plain formatter that appends extra fields as key=value pairs"""

    def __init__(self):
        super().__init__("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        extra = getattr(record, "extra_fields", None)
        if extra:
            line += " " + " ".join(f"{k}={v}" for k, v in extra.items())
        return line


class LoggerService:
    """Owns the root logger; every handler writes to stderr"""

    def __init__(self, level: Optional[str] = None, log_format: Optional[str] = None):
        self.settings = get_settings()
        self.level = (level or self.settings.log_level).upper()
        self.log_format = (log_format or self.settings.log_format).lower()
        self._loggers: Dict[str, logging.Logger] = {}
        self._context: Dict[str, Any] = {}
        self._setup_root_logger()

    def _setup_root_logger(self):
        root_logger = logging.getLogger()
        root_logger.setLevel(getattr(logging, self.level, logging.INFO))

        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)

        console_handler = logging.StreamHandler(sys.stderr)
        if self.log_format == "json":
            console_handler.setFormatter(StructuredFormatter())
        else:
            console_handler.setFormatter(TextFormatter())
        root_logger.addHandler(console_handler)

    def get_logger(self, name: str) -> "ContextLogger":
        """Get or create a logger with the given name"""
        if name not in self._loggers:
            self._loggers[name] = logging.getLogger(f"lawmine.{name}")
        return ContextLogger(self._loggers[name], self._context)

    @contextmanager
    def context(self, **kwargs):
        """Scope extra fields to a block"""
        saved = dict(self._context)
        self._context.update(kwargs)
        try:
            yield
        finally:
            self._context.clear()
            self._context.update(saved)


class ContextLogger:
    """Logger wrapper with context support"""

    def __init__(self, logger: logging.Logger, context: Dict[str, Any], own: Optional[Dict[str, Any]] = None):
        self._logger = logger
        # shared dict: scoped service context is visible to loggers created earlier
        self._context = context
        self._own = own or {}

    def _log(self, level: int, message: str, exc_info: bool = False, **kwargs):
        if not self._logger.isEnabledFor(level):
            return
        extra_fields = dict(self._context)
        extra_fields.update(self._own)
        extra_fields.update(kwargs)

        record = self._logger.makeRecord(
            self._logger.name,
            level,
            "",
            0,
            message,
            (),
            sys.exc_info() if exc_info else None,
        )
        record.extra_fields = extra_fields
        self._logger.handle(record)

    def debug(self, message: str, **kwargs):
        self._log(logging.DEBUG, message, **kwargs)

    def info(self, message: str, **kwargs):
        self._log(logging.INFO, message, **kwargs)

    def warning(self, message: str, **kwargs):
        self._log(logging.WARNING, message, **kwargs)

    def error(self, message: str, **kwargs):
        self._log(logging.ERROR, message, **kwargs)

    def exception(self, message: str, **kwargs):
        """Log exception with traceback"""
        self._log(logging.ERROR, message, exc_info=True, **kwargs)

    def with_context(self, **kwargs) -> "ContextLogger":
        """Create new logger with additional context"""
        own = dict(self._own)
        own.update(kwargs)
        return ContextLogger(self._logger, self._context, own)


class ExceptionHandler:
    """Centralized exception handling with logging"""

    def __init__(self, logger_service: LoggerService):
        self.logger_service = logger_service

    def handle_exception(
        self, exc: Exception, context: str = "unknown", logger_name: str = "exception_handler", **extra_context
    ) -> Dict[str, Any]:
        """Log the exception and return its description"""
        logger = self.logger_service.get_logger(logger_name)

        error_info = {
            "error_type": type(exc).__name__,
            "error_message": str(exc),
            "context": context,
        }
        details = getattr(exc, "details", None)
        if details:
            error_info["details"] = details
        error_info.update(extra_context)

        logger.exception(f"Exception in {context}", **error_info)
        return error_info


def log_execution_time(logger_name: str = "performance"):
    """Log start/finish of the wrapped call and record `<logger_name>.seconds`"""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logger = get_logger_service().get_logger(logger_name)
            start = time.perf_counter()
            logger.debug(f"Starting {func.__name__}", function=func.__name__)
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                duration = time.perf_counter() - start
                logger.error(
                    f"Failed {func.__name__}",
                    function=func.__name__,
                    duration_seconds=duration,
                    success=False,
                    error=str(e),
                )
                raise
            duration = time.perf_counter() - start
            get_monitoring_service().record_histogram(f"{logger_name}.seconds", duration)
            logger.info(
                f"Completed {func.__name__}",
                function=func.__name__,
                duration_seconds=round(duration, 6),
                success=True,
            )
            return result

        return wrapper

    return decorator


def handle_exceptions(logger_name: str = "exception_handler", context: Optional[str] = None):
    """Decorator to handle exceptions with logging"""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                func_context = context or f"{func.__module__}.{func.__name__}"
                get_exception_handler().handle_exception(e, func_context, logger_name)
                raise

        return wrapper

    return decorator


# Global instances
_logger_service: Optional[LoggerService] = None
_exception_handler: Optional[ExceptionHandler] = None


def get_logger_service() -> LoggerService:
    """Get global logger service instance"""
    global _logger_service
    if _logger_service is None:
        _logger_service = LoggerService()
    return _logger_service


def configure_logging(level: Optional[str] = None, log_format: Optional[str] = None) -> LoggerService:
    """Re-apply level/format (CLI flags) to the global service"""
    service = get_logger_service()
    if level:
        service.level = level.upper()
    if log_format:
        service.log_format = log_format.lower()
    service._setup_root_logger()
    return service


def get_exception_handler() -> ExceptionHandler:
    """Get global exception handler instance"""
    global _exception_handler
    if _exception_handler is None:
        _exception_handler = ExceptionHandler(get_logger_service())
    return _exception_handler


def get_logger(name: str) -> ContextLogger:
    """Convenience function to get a logger"""
    return get_logger_service().get_logger(name)
