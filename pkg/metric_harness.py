#!/usr/bin/env python3
"""
Metric Consistency Harness Launcher

Runs the harness CLI from the project root:

    uv run python metric_harness.py diff --task classification --input preds.csv
"""

import sys
from pathlib import Path

# Add project root to path
sys.path.append(str(Path(__file__).parent))

from modules.harness.cli import main

if __name__ == "__main__":
    sys.exit(main())
