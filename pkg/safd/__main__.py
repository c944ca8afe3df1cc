"""Run the command line with ``python -m safd``."""

import sys

from safd.cli import main

sys.exit(main())
