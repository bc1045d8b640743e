"""Allow ``python -m cqeval`` as an alias for the ``cqeval`` script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
