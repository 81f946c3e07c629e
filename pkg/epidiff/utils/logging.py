"""Logging.

Colour-coded console logging shared by the library, the workflows and the
CLI. Numerical modules log run milestones at INFO and per-iteration
telemetry at DEBUG.

"""
from __future__ import annotations

import logging

import typer

LOG_FORMAT = "%(asctime)s  %(levelname)-5s  %(name)-5s  |  %(message)s"

# (foreground, background) per level
LEVEL_STYLES = {
    logging.DEBUG: (typer.colors.BLACK, None),
    logging.INFO: (typer.colors.BRIGHT_BLUE, None),
    logging.WARNING: (typer.colors.BRIGHT_MAGENTA, None),
    logging.ERROR: (typer.colors.BRIGHT_WHITE, typer.colors.RED),
    logging.CRITICAL: (typer.colors.BRIGHT_RED, None),
}


class TyperLoggerHandler(logging.Handler):
    """Writes records to stderr so run output on stdout stays clean."""

    def emit(self, record: logging.LogRecord) -> None:
        fg, bg = LEVEL_STYLES.get(record.levelno, (None, None))
        typer.secho(self.format(record), fg=fg, bg=bg, err=True)


def get_logger(name, log_level=logging.INFO):
    """Get logger.

    Args:
        name (str):
            logger name, usually the calling module's ``__name__``
        log_level (int):
            threshold for the returned logger

    Returns:
        logging.Logger
    """
    handler = TyperLoggerHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.basicConfig(level=log_level, handlers=(handler,))
    logger = logging.getLogger(name)
    logger.setLevel(log_level)
    return logger


def set_log_level(log_level):
    """Set level of every epidiff logger, used by the CLI ``--verbose`` flag."""
    for name in logging.root.manager.loggerDict:
        if name.startswith("epidiff"):
            logging.getLogger(name).setLevel(log_level)
