#!/usr/bin/env python3
"""Run the acceptance suite and print one pass/fail line per criterion."""

import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    result = subprocess.run(
        [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"),
         "-q", "-s"],
        cwd=ROOT)
    return result.returncode


if __name__ == "__main__":
    sys.exit(main())
