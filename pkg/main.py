#!/usr/bin/env python3
"""
Multiregeneration toolkit

Entry point for the command-line interface.

Usage:
    python main.py solve system.msys --seed 7
    python main.py member system.mwit --point "1,0,0;1,0,3"
    python main.py demo
"""

import sys
from pathlib import Path

# Ensure the package directory is in the path
app_dir = Path(__file__).parent
if str(app_dir) not in sys.path:
    sys.path.insert(0, str(app_dir))


def main():
    """Main entry point."""
    from cli import main as run
    return run()


if __name__ == "__main__":
    sys.exit(main())
