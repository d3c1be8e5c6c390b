#!/usr/bin/env python3
"""Build every explicit cover for (g, ell) and tabulate validity, genericity and multiplicity."""
from __future__ import annotations

import argparse
import sys

from tevelev.covers import build_covers, dilation_matrix, is_generic_preimage, multiplicity_breakdown, validate_cover


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g", type=int, required=True)
    ap.add_argument("--ell", type=int, default=0)
    ap.add_argument("--matrices", action="store_true", help="print each dilation matrix")
    args = ap.parse_args(argv)

    bad = 0
    for i, cover in enumerate(build_covers(args.g, args.ell)):
        ok = validate_cover(cover).ok
        generic = ok and is_generic_preimage(cover)
        m = multiplicity_breakdown(cover) if generic else None
        bad += not (ok and generic and m.value == 1)
        print(f"{i}\t{cover.cell.record()}\tplan={cover.plan}\tvalid={ok}\tgeneric={generic}\t"
              f"mult={m.value if m else '-'}")
        if args.matrices:
            print(dilation_matrix(cover).text())
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
