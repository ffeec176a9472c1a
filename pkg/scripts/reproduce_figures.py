"""Write CSV and SVG for every figure preset into a results directory."""

import argparse
import sys

from catsense.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--workers", default="1")
    args = ap.parse_args()
    for group in ("fig1", "fig2"):
        code = main([group, "--out", args.out, "--format", "both", "--workers", args.workers])
        if code:
            sys.exit(code)
