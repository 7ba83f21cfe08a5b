"""
Command Line Module

The `capmap` executable and its subcommands.

Author: CapMap Project
License: MIT
"""

from .main import main, build_parser

__all__ = ['main', 'build_parser']
