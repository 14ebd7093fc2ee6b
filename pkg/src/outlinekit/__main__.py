"""Entry point for `python -m outlinekit`."""

import sys

from .cli import main

sys.exit(main())
