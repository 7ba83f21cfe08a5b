"""
File Operation Utilities

Provides hashing of input files for run manifests and atomic, deterministic
writers for the CSV and JSON artifacts produced by each pipeline stage.

Author: CapMap Project
License: MIT
"""

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

from .logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def calculate_file_hash(file_path: PathLike, algorithm: str = "sha256", chunk_size: int = 8192) -> str:
    """
    Calculate hash of a file over its raw bytes.

    Args:
        file_path: Path to the file
        algorithm: Hash algorithm (md5, sha1, sha256, etc.)
        chunk_size: Size of chunks to read (bytes)

    Returns:
        Hexadecimal hash string

    Raises:
        FileNotFoundError: If file doesn't exist
        ValueError: If algorithm is unsupported
    """
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")

    try:
        hash_func = hashlib.new(algorithm)
    except ValueError:
        raise ValueError(f"Unsupported hash algorithm: {algorithm}")

    with open(file_path, 'rb') as f:
        while chunk := f.read(chunk_size):
            hash_func.update(chunk)

    return hash_func.hexdigest()


def write_text_atomic(path: PathLike, content: str) -> Path:
    """
    Write text to a file through a temporary sibling and an atomic rename.

    A reader never observes a half-written artifact, and a failure leaves
    no partial output behind.

    Args:
        path: Destination path
        content: Text to write (UTF-8, newlines untranslated)

    Returns:
        The destination path
    """
    dest = Path(path)
    dest.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(prefix=f".{dest.name}.", dir=str(dest.parent))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(content)
        os.replace(tmp_name, dest)
    except Exception:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise

    logger.debug(f"Wrote {dest}")
    return dest


def dumps_json(data: Any) -> str:
    """Serialize to canonical JSON: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: PathLike, data: Any) -> Path:
    """Write canonical JSON atomically."""
    return write_text_atomic(path, dumps_json(data))


def read_json(path: PathLike) -> Any:
    """Read a UTF-8 JSON document."""
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def format_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    Render rows as CSV text with a header and `\\n` line endings.

    Floats are written with `repr`, the shortest string that reads back to
    the same double. `None` becomes an empty cell.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(cell) for cell in row])
    return buffer.getvalue()


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV table atomically."""
    return write_text_atomic(path, format_csv(header, rows))


def _format_cell(cell: Any) -> str:
    if cell is None:
        return ""
    if isinstance(cell, bool):
        return "true" if cell else "false"
    if isinstance(cell, float):
        return repr(float(cell))
    return str(cell)


def ensure_directory(directory: PathLike) -> Path:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        directory: Directory path

    Returns:
        The directory path

    Raises:
        OSError: If the directory cannot be created
    """
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path
