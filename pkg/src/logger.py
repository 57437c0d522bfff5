"""Structured logging configuration for gaitscope."""

import json
import logging
import sys
import threading
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

# Thread-local storage for run context
_context = threading.local()

# Attributes every LogRecord carries; anything else came in through ``extra``.
_RESERVED = set(vars(logging.makeLogRecord({}))) | {"message", "asctime"}


def set_run_context(run_id: str) -> None:
    """Set the current run ID for logging context."""
    _context.run_id = run_id


def get_run_context() -> Optional[str]:
    """Get the current run ID from context."""
    return getattr(_context, "run_id", None)


def clear_run_context() -> None:
    """Forget the current run ID."""
    _context.run_id = None


class StructuredFormatter(logging.Formatter):
    """JSON formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        run_id = get_run_context()
        if run_id:
            log_entry["run_id"] = run_id

        # Fields passed through ``extra=``
        for key, value in record.__dict__.items():
            if key not in _RESERVED and not key.startswith("_"):
                log_entry[key] = value

        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_entry, default=str)


class HumanReadableFormatter(logging.Formatter):
    """Human-readable formatter with run ID."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record for human reading."""
        run_id = get_run_context()
        run_prefix = f"[{run_id}] " if run_id else ""
        return f"{run_prefix}{super().format(record)}"


class MetricsLogger:
    """Logger for training, evaluation and stage metrics."""

    def __init__(self, logger_name: str = "gaitscope.metrics"):
        self.logger = logging.getLogger(logger_name)

    def log_epoch(
        self,
        epoch: int,
        loss: float,
        classification_loss: float,
        distance_loss: float,
    ) -> None:
        """Log the loss of one training epoch."""
        self.logger.debug(
            f"Epoch {epoch} loss {loss:.6f}",
            extra={
                "epoch": epoch,
                "loss": loss,
                "classification_loss": classification_loss,
                "distance_loss": distance_loss,
                "event_type": "epoch",
            },
        )

    def log_fold(self, fold: int, metrics: dict) -> None:
        """Log the results of one cross-validation fold."""
        self.logger.info(
            f"Fold {fold} completed",
            extra={"fold": fold, **metrics, "event_type": "fold_completed"},
        )

    def log_stage(self, stage: str, duration: float, **details) -> None:
        """Log completion of a pipeline stage."""
        self.logger.info(
            f"{stage} completed in {duration:.2f}s",
            extra={
                "stage": stage,
                "duration_seconds": duration,
                **details,
                "event_type": "stage_completed",
            },
        )


def setup_logging(
    debug: bool = False, structured: bool = False, log_dir: Optional[Path] = None
) -> None:
    """Configure logging for the application."""
    level = logging.DEBUG if debug else logging.INFO

    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
    root_logger.setLevel(logging.DEBUG)

    if log_dir is not None:
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_dir / "gaitscope.log",
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(StructuredFormatter())
        root_logger.addHandler(file_handler)

    # Results go to files and stdout, so logs stay on stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    if structured:
        console_handler.setFormatter(StructuredFormatter())
    else:
        console_handler.setFormatter(
            HumanReadableFormatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        )
    root_logger.addHandler(console_handler)

    logging.getLogger("PIL").setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    """Get a logger instance with consistent configuration."""
    return logging.getLogger(f"gaitscope.{name}")
