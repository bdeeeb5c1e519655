"""Console and rotating-file logging shared by the CLI, the API and the experiment workers.

Python warnings (scipy's IntegrationWarning, numpy's RuntimeWarning) are routed
into the same handlers so a table run leaves one complete log.
"""

from __future__ import annotations

import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
LOG_FILE_NAME = "hyperapprox.log.txt"
NOISY_LOGGERS = ("matplotlib", "PIL", "multipart")

_MARKER = "_hyperapprox_handlers"


def log_dir() -> Path:
    return Path(os.environ.get("HYPERAPPROX_LOG_DIR", "logs"))


def setup_logging(level: str | int = logging.INFO) -> None:
    """Attach the file and console handlers to the root logger once per process."""
    root = logging.getLogger()
    if getattr(root, _MARKER, False):
        return

    directory = log_dir()
    directory.mkdir(parents=True, exist_ok=True)
    formatter = logging.Formatter(LOG_FORMAT)

    handlers = [
        RotatingFileHandler(directory / LOG_FILE_NAME, maxBytes=2_000_000, backupCount=5, encoding="utf-8"),
        logging.StreamHandler(),
    ]
    root.handlers.clear()
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)
    root.setLevel(level)

    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
    logging.captureWarnings(True)
    setattr(root, _MARKER, True)


def set_level(level: str | int) -> None:
    """Change the root level after setup (``--log-level`` or ``HYPERAPPROX_LOG_LEVEL``)."""
    setup_logging()
    logging.getLogger().setLevel(level)


def get_logger(name: str) -> logging.Logger:
    setup_logging()
    return logging.getLogger(name)
