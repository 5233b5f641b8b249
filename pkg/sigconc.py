"""
Launcher for the sigconc command line.

Usage:
    python sigconc.py variance --config samples/configs/variance_bm.json --seed 7
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from src.harness.cli import main  # noqa: E402

if __name__ == "__main__":
    raise SystemExit(main())
