"""
Run Manifest

Provenance record written next to every pipeline output: tool version,
subcommand, resolved configuration, digests of the input files and timing.

Author: CapMap Project
License: MIT
"""

import time
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from pydantic import BaseModel, Field

from .. import __version__
from ..utils.file_ops import calculate_file_hash, write_json

MANIFEST_NAME = "manifest.json"


class InputDigest(BaseModel):
    """An input file by name and the SHA-256 of its raw bytes."""
    name: str
    sha256: str


class RunManifest(BaseModel):
    """
    Provenance of one subcommand run.

    Paths are recorded by file name only, so identical runs into different
    directories produce identical manifests apart from `duration_seconds`.
    """
    tool_version: str
    subcommand: str
    arguments: Dict[str, Any] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    inputs: Dict[str, InputDigest] = Field(default_factory=dict)
    seed: Optional[int] = None
    duration_seconds: float = 0.0

    def add_input(self, role: str, path: Union[str, Path]) -> None:
        path = Path(path)
        self.inputs[role] = InputDigest(name=path.name, sha256=calculate_file_hash(path))

    def write(self, directory: Union[str, Path]) -> Path:
        """Write manifest.json into `directory`, replacing any earlier one."""
        return write_json(Path(directory) / MANIFEST_NAME, self.model_dump(mode="json"))


class RunTimer:
    """Wall-clock timer for a manifest's duration field."""

    def __init__(self):
        self.started = time.perf_counter()

    def stop(self, manifest: RunManifest) -> RunManifest:
        manifest.duration_seconds = round(time.perf_counter() - self.started, 6)
        return manifest


def new_manifest(
    subcommand: str,
    arguments: Mapping[str, Any],
    config: Mapping[str, Any],
    seed: Optional[int] = None,
) -> RunManifest:
    return RunManifest(
        tool_version=__version__,
        subcommand=subcommand,
        arguments=dict(arguments),
        config=dict(config),
        seed=seed,
    )
