#!/usr/bin/env python3
"""Compare the closed formula with the grid class count over a range of instances, one CSV row each."""
from __future__ import annotations

import argparse
import csv
import sys

from tevelev.cli import general_instances, valid_simple_instances
from tevelev.core import Params
from tevelev.formulas import tev_ell, tev_general
from tevelev.grid import build_grid, build_grid_general, class_count


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g-max", type=int, default=12)
    ap.add_argument("--general-g-max", type=int, default=6)
    args = ap.parse_args(argv)

    out = csv.writer(sys.stdout)
    out.writerow(["g", "ell", "mu", "formula", "grid", "agree"])
    bad = 0
    for g, ell in valid_simple_instances(args.g_max):
        f, c = tev_ell(g, ell).value, class_count(build_grid(g, ell))
        bad += f != c
        out.writerow([g, ell, Params.all_simple(g, ell).mu_text(), f, c, f == c])
    for p in general_instances(args.general_g_max):
        f, c = tev_general(p).value, class_count(build_grid_general(p))
        bad += f != c
        out.writerow([p.g, p.ell, p.mu_text(), f, c, f == c])
    print(f"# {bad} disagreements", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
