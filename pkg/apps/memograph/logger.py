""" Logger configuration for memograph """
import logging
from datetime import datetime
from pathlib import Path
from typing import Optional

from memograph import settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def get_logger(
    name: str = "memograph",
    path: Optional[str] = None,
    echo: bool = False,
    level: str = "INFO",
) -> logging.Logger:
    """
    Configure and get a memograph logger
    :param name: logger name, children of ``memograph`` propagate to it
    :param path: directory for a timestamped log file, no file logging if None
    :param echo: write logs in terminal if set to True
    :param level: logging level name
    :return: Configured logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(level.upper())
    formatter = logging.Formatter(LOG_FORMAT)

    if path:
        path_dir = Path(path)
        path_dir.mkdir(parents=True, exist_ok=True)
        log_path = path_dir / datetime.now().strftime("memograph_%Y%m%d_%H%M%S.log")
        file_handler = logging.FileHandler(log_path)
        file_handler.setLevel(level.upper())
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    if not echo:
        return logger

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level.upper())
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    return logger


def configure_logging(echo: bool = True) -> logging.Logger:
    """
    Configure the package logger from environment settings; safe to call more than once.
    :param echo: write logs in terminal if set to True
    :return: the ``memograph`` logger
    """
    logger = logging.getLogger("memograph")
    if logger.handlers:
        return logger
    return get_logger(
        "memograph", path=settings.LOG_DIR or None, echo=echo, level=settings.LOG_LEVEL
    )
