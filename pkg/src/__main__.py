"""Run the CapMap command line: python -m src <subcommand> ..."""

import sys

from .cli.main import main

sys.exit(main())
