"""Full oracle-vs-closed-form comparison on the default grid, plus the optimum.

Pass --long to also check the kappaT = 0.02 optimum against the Fock oracle
(about a minute per point).
"""

import argparse
import math
import sys
import time

from catsense.analytic import ProtocolConfig, bias_point
from catsense.oracle import oracle_snr
from catsense.sweep import find_optimal_D, validation_report

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--long", action="store_true")
    args = ap.parse_args()
    t0 = time.perf_counter()
    rep = validation_report(workers=args.workers)
    print(rep.render())
    print(f"[{time.perf_counter() - t0:.1f} s]")
    if args.long:
        o = find_optimal_D(0.02)
        for D in (100.0, round(o.d_star)):
            cfg = ProtocolConfig.from_angles(D=D, theta=bias_point(D), kappaT=0.02)
            print(f"oracle R(D={D:g}, kappaT=0.02) = {oracle_snr(cfg):.6f}")
    sys.exit(0 if rep.passed else 1)
