"""Console entry point for the ``osd`` tool."""

import sys

from src.interfaces.cli.main import main

__all__ = ["main"]

if __name__ == "__main__":
    sys.exit(main())
