"""
Core Module

Pipeline stages behind the subcommands and the run manifest written with
every output.

Author: CapMap Project
License: MIT
"""

from .manifest import RunManifest, RunTimer, new_manifest, MANIFEST_NAME
from . import pipeline

__all__ = ['RunManifest', 'RunTimer', 'new_manifest', 'MANIFEST_NAME', 'pipeline']
