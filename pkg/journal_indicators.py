#!/usr/bin/env python3
"""
Journal Indicators launcher for running from a source checkout.
"""

import sys
import os

# Add the package to Python path
sys.path.insert(0, os.path.dirname(__file__))

from journal_indicators.__main__ import main

if __name__ == "__main__":
    sys.exit(main())
