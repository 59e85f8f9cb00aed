"""
Console Module for Simpson Scan
Coloured stderr logging and progress bars
"""

import logging
import sys

from colorama import Fore, Style, init
from tqdm import tqdm

_LEVEL_COLORS = {
    logging.DEBUG: Fore.CYAN,
    logging.INFO: Fore.GREEN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}

_configured = False


class ColorFormatter(logging.Formatter):
    """Formatter that colours the level name"""

    def format(self, record):
        color = _LEVEL_COLORS.get(record.levelno, "")
        message = super().format(record)
        return f"{color}{record.levelname:<7}{Style.RESET_ALL} {message}"


def get_logger(name):
    """
    Get a package logger

    Args:
        name (str): Usually the module's __name__

    Returns:
        logging.Logger: Logger under the package root
    """
    return logging.getLogger(name)


def configure_logging(level=logging.INFO, stream=None):
    """
    Install the coloured stderr handler on the root "src" logger

    Args:
        level (int): Logging level
        stream: Output stream (defaults to sys.stderr)
    """
    global _configured

    init(strip=not sys.stderr.isatty())
    root = logging.getLogger("src")
    if not _configured:
        handler = logging.StreamHandler(stream or sys.stderr)
        handler.setFormatter(ColorFormatter("%(name)s: %(message)s"))
        root.addHandler(handler)
        root.propagate = False
        _configured = True
    root.setLevel(level)


def progress(iterable, total=None, description=None, enabled=True):
    """
    Wrap an iterable in a tqdm bar on stderr

    Args:
        iterable: Items to iterate
        total (int): Number of items, if the iterable has no len()
        description (str): Bar label
        enabled (bool): When False the iterable is returned untouched

    Returns:
        iterable: The (possibly wrapped) iterable
    """
    if not enabled:
        return iterable
    return tqdm(iterable, total=total, desc=description, file=sys.stderr,
                leave=False, dynamic_ncols=True)
