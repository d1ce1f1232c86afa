"""
Entry point for the command-line tool.
Run with: python -m kcopy <command> ...
"""
import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
