"""Entry point for ``python -m rxnspan``."""

import sys

from .cli import main

sys.exit(main())
