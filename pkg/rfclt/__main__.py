"""Allow running as python -m rfclt"""

import sys

from .cli import main

sys.exit(main())
