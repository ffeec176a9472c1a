"""Rebuild tests/golden/ from the fig1 and fig2 presets via the CLI.

Run only after an intentional change to the closed-form model; the golden
CSVs are regression anchors for the figure presets.
"""

import sys
from pathlib import Path

from catsense.cli import main

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"

if __name__ == "__main__":
    for group in ("fig1", "fig2"):
        code = main([group, "--out", str(GOLDEN), "--no-metadata"])
        if code:
            sys.exit(code)
