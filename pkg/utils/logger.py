import sys
import logging
from pathlib import Path
from typing import Any, Dict, Optional
from utils.config import settings


class ContextFormatter(logging.Formatter):
    """Appends the record's keyword context as sorted key=value pairs."""

    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        context: Dict[str, Any] = getattr(record, "context", None) or {}
        if not context:
            return text
        pairs = " ".join(f"{key}={context[key]!r}" if isinstance(context[key], str) else f"{key}={context[key]}"
                         for key in sorted(context))
        return f"{text} [{pairs}]"


class StructuredLogger:
    """Logger whose keyword arguments become record context. Writes to stderr so stdout stays machine-readable."""

    def __init__(self, name: str, level: Optional[str] = None, context: Optional[Dict[str, Any]] = None):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, (level or settings.log_level).upper(), logging.INFO))
        self.context: Dict[str, Any] = dict(context or {})

        # Prevent duplicate handlers
        if not self.logger.handlers:
            self._setup_handlers()

    def _setup_handlers(self):
        formatter = ContextFormatter(settings.log_format)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        log_file = settings.log_file
        if log_file is None and settings.environment == "production":
            log_file = "logs/curvflow.log"
        if log_file:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)
        self.logger.propagate = False

    def bind(self, **context) -> "StructuredLogger":
        """Same underlying logger with extra context on every record."""
        return StructuredLogger(
            self.logger.name, level=logging.getLevelName(self.logger.level), context={**self.context, **context}
        )

    def _log(self, level: int, message: str, context: Dict[str, Any], exc_info: bool = False) -> None:
        if self.logger.isEnabledFor(level):
            self.logger.log(level, message, exc_info=exc_info, extra={"context": {**self.context, **context}})

    def info(self, message: str, **kwargs):
        self._log(logging.INFO, message, kwargs)

    def warning(self, message: str, **kwargs):
        self._log(logging.WARNING, message, kwargs)

    def error(self, message: str, **kwargs):
        self._log(logging.ERROR, message, kwargs)

    def debug(self, message: str, **kwargs):
        self._log(logging.DEBUG, message, kwargs)

    def exception(self, message: str, **kwargs):
        """Error with the active traceback."""
        self._log(logging.ERROR, message, kwargs, exc_info=True)


def get_logger(name: str) -> StructuredLogger:
    return StructuredLogger(name)
