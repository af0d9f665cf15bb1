"""Allow ``python -m coherence_lab``."""
import sys

from .cli import main

sys.exit(main())
