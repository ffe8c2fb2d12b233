"""Run the seisflow command line with ``python -m seisflow``."""
import sys

from seisflow.cli import main

sys.exit(main())
