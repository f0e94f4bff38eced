#!/usr/bin/env python3
"""Runnable wrapper around the installed ``adapt`` console script.

Usage: python adapt.py --in policy.html --html --out policy.conllu
"""

import sys

from parse_adapter.cli import main

if __name__ == "__main__":
    sys.exit(main())
