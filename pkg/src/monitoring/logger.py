"""
Structured JSON logging with optional Google Cloud Logging sink
"""

import os
import logging
import json
from datetime import datetime, timezone
from typing import Any, Optional

try:
    from google.cloud import logging as cloud_logging
    CLOUD_LOGGING_AVAILABLE = True
except ImportError:
    CLOUD_LOGGING_AVAILABLE = False


def _cloud_logging_requested() -> bool:
    return os.getenv('USE_CLOUD_LOGGING', 'false').lower() in ('1', 'true', 'yes')


class StructuredLogger:
    """Structured logger emitting one JSON object per line"""

    def __init__(self, name: str = __name__, use_cloud_logging: Optional[bool] = None):
        """
        Initialize structured logger

        Args:
            name: Logger name
            use_cloud_logging: Ship records to Cloud Logging as well
                (defaults to the USE_CLOUD_LOGGING env var)
        """
        self.name = name
        if use_cloud_logging is None:
            use_cloud_logging = _cloud_logging_requested()
        self.use_cloud_logging = use_cloud_logging and CLOUD_LOGGING_AVAILABLE

        self.logger = logging.getLogger(name)
        log_level = os.getenv('LOG_LEVEL', 'INFO').upper()
        self.logger.setLevel(getattr(logging, log_level, logging.INFO))

        if not self.logger.handlers:
            handler = logging.StreamHandler()
            handler.setFormatter(JsonFormatter())
            self.logger.addHandler(handler)
            self.logger.propagate = False

        self.cloud_logger = None
        if self.use_cloud_logging:
            try:
                client = cloud_logging.Client()
                self.cloud_logger = client.logger(name)
            except Exception as e:
                self.logger.warning(f"Could not initialize Cloud Logging: {e}")

    def _log(self, level: str, message: str, **kwargs: Any) -> None:
        """
        Internal logging method

        Args:
            level: Log level (INFO, WARNING, ERROR, DEBUG)
            message: Log message
            **kwargs: Additional structured data
        """
        log_method = getattr(self.logger, level.lower())
        if not self.logger.isEnabledFor(getattr(logging, level)):
            return

        log_data = {
            'message': message,
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'level': level,
            'logger': self.name,
            **kwargs
        }
        log_method(json.dumps(log_data, default=str))

        if self.cloud_logger:
            try:
                self.cloud_logger.log_struct(log_data, severity=level)
            except Exception as e:
                self.logger.error(f"Failed to log to Cloud Logging: {e}")

    def info(self, message: str, **kwargs: Any) -> None:
        """Log info message"""
        self._log('INFO', message, **kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        """Log warning message"""
        self._log('WARNING', message, **kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        """Log error message"""
        self._log('ERROR', message, **kwargs)

    def debug(self, message: str, **kwargs: Any) -> None:
        """Log debug message"""
        self._log('DEBUG', message, **kwargs)

    def experiment_start(self, experiment: str, **kwargs: Any) -> None:
        """Log experiment start"""
        self.info(
            f"Experiment {experiment} started",
            experiment=experiment,
            event='experiment_start',
            **kwargs
        )

    def experiment_complete(
        self,
        experiment: str,
        duration_seconds: float,
        passed: bool,
        **kwargs: Any
    ) -> None:
        """Log experiment completion"""
        self.info(
            f"Experiment {experiment} completed",
            experiment=experiment,
            duration_seconds=round(duration_seconds, 3),
            passed=passed,
            event='experiment_complete',
            **kwargs
        )

    def experiment_error(self, experiment: str, error: Exception, **kwargs: Any) -> None:
        """Log experiment error"""
        self.error(
            f"Experiment {experiment} failed: {error}",
            experiment=experiment,
            error_type=type(error).__name__,
            error_message=str(error),
            event='experiment_error',
            **kwargs
        )

    def sample_contaminated(self, seed: Optional[int], reason: str, **kwargs: Any) -> None:
        """Log a sample excluded by the guard-band audit"""
        self.debug(
            "Sample contaminated",
            seed=seed,
            reason=reason,
            event='sample_contaminated',
            **kwargs
        )

    def check_failed(self, check: str, seed: Optional[int], **kwargs: Any) -> None:
        """Log a failed pathwise check"""
        self.warning(
            f"Check {check} failed",
            check=check,
            seed=seed,
            event='check_failed',
            **kwargs
        )


class JsonFormatter(logging.Formatter):
    """JSON formatter for log records"""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON"""
        message = record.getMessage()
        try:
            json.loads(message)
            return message
        except (json.JSONDecodeError, ValueError):
            log_data = {
                'timestamp': datetime.now(timezone.utc).isoformat(),
                'level': record.levelname,
                'logger': record.name,
                'message': message,
            }

            if record.exc_info:
                log_data['exception'] = self.formatException(record.exc_info)

            return json.dumps(log_data)


def set_log_level(level: str) -> None:
    """Apply `level` to every logger already created by StructuredLogger"""
    value = getattr(logging, level.upper(), logging.INFO)
    for logger in logging.Logger.manager.loggerDict.values():
        if isinstance(logger, logging.Logger) and any(isinstance(h.formatter, JsonFormatter) for h in logger.handlers):
            logger.setLevel(value)
