"""Run the experiment command line interface"""

import sys

from .cli import main

sys.exit(main())
