#!/usr/bin/env python
"""
Simple script to run the kcopy command-line tool.
Usage: python run.py <command> ...
"""
import sys

from kcopy.cli import main

if __name__ == "__main__":
    sys.exit(main())
