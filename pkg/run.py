#!/usr/bin/env python3
"""
Launcher script for kreiss-lab

Run this script to use the command-line interface without installing:

  python run.py growth --a 0.5 --p 1 --n 16..4096 --out growth.csv
"""

import os
import sys

# Make the src package importable from a source checkout
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

if __name__ == "__main__":
    from src.main import main
    sys.exit(main())
