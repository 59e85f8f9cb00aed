"""
Save/Load Module for Simpson Scan
Reads JSON inputs and writes report bytes to files or standard output
"""

import json
import os
import sys

from src.utils.console import get_logger
from src.utils.errors import FileError

logger = get_logger(__name__)


def ensure_directory(path):
    """
    Create a directory (and its parents) if it does not exist

    Args:
        path (str): Directory path

    Returns:
        str: The same path
    """
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise FileError(f"cannot create directory '{path}': {e.strerror}") from None
    return path


def write_output(payload, filepath=None):
    """
    Write bytes to a file, or to standard output when no path is given

    Args:
        payload (bytes): Content to write
        filepath (str): Optional destination; parent directories are created

    Returns:
        str: Path written to, or None for standard output
    """
    if filepath is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
        return None

    parent = os.path.dirname(filepath)
    if parent:
        ensure_directory(parent)
    try:
        with open(filepath, "wb") as f:
            f.write(payload)
    except OSError as e:
        raise FileError(f"cannot write '{filepath}': {e.strerror}") from None
    logger.debug(f"Wrote {len(payload)} bytes to {filepath}")
    return filepath


def load_json(path, error_cls=FileError):
    """
    Read a JSON document

    Args:
        path (str): File to read
        error_cls (type): Exception raised for missing or malformed files

    Returns:
        object: Parsed JSON value
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise error_cls(f"cannot read '{path}': {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise error_cls(f"'{path}' is not valid JSON (line {e.lineno}): {e.msg}") from None


def write_json(data, filepath):
    """Write a JSON document with sorted keys and a trailing newline"""
    text = json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"
    return write_output(text.encode("utf-8"), filepath)
