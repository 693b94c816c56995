"""python -m poliview"""

import sys

from .cli import main

sys.exit(main())
