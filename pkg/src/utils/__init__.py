"""
Utils Package Initialization
Contains errors, console logging and file helpers
"""

from src.utils.console import configure_logging, get_logger, progress
from src.utils.errors import DataError, DisaggregationError, UsageError
from src.utils.save_load import ensure_directory, load_json, write_json, write_output
