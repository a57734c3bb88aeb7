"""Allow `python -m blindssr` as an alternative to the console script."""

import sys

from blindssr.cli import main

if __name__ == "__main__":
    sys.exit(main())
