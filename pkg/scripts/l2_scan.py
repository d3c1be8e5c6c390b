#!/usr/bin/env python3
"""Search for cut/join tuples with L2 >= 4 that satisfy the degree and length inequalities."""
from __future__ import annotations

import argparse
import sys
from collections import Counter

from tevelev.grid import l2_scan


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d-max", type=int, default=30)
    ap.add_argument("--show", type=int, default=10, help="print this many witnesses")
    args = ap.parse_args(argv)

    found, examined = l2_scan(args.d_max)
    print(f"examined {examined}, feasible {len(found)}")
    for row in found[: args.show]:
        d, j1, j2, L1, L2, L3, dec = row
        print(f"d={d} j1={j1} j2={j2} L1={L1} L2={L2} L3={L3} parts={list(dec)}")
    by_d = Counter(row[0] for row in found)
    print("feasible per d:", dict(sorted(by_d.items())))
    return 1 if found else 0


if __name__ == "__main__":
    sys.exit(main())
