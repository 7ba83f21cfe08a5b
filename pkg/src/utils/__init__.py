"""
CapMap Utilities Module

Common utility functions for logging, hashing and artifact writing.

Author: CapMap Project
License: MIT
"""

from .logger import setup_logging, get_logger
from .file_ops import (
    calculate_file_hash,
    write_text_atomic,
    write_json,
    read_json,
    write_csv,
    format_csv,
    dumps_json,
    ensure_directory,
)

__all__ = [
    'setup_logging', 'get_logger', 'calculate_file_hash', 'write_text_atomic',
    'write_json', 'read_json', 'write_csv', 'format_csv', 'dumps_json', 'ensure_directory',
]
