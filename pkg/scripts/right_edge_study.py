"""Finite-left enumeration of right-edge expectations and their extrapolation.

Prints the raw sequence in the left length l next to the extrapolated value
and the closed form in lambda, for single spins and two-spin clusters.

    python3 scripts/right_edge_study.py --beta 0.5 --lefts 10:20:1
"""

import argparse

from fareychain.cli import parse_geometry, parse_grid
from fareychain.expectations import closed_form_infinite_left, enumerate_infinite_left
from fareychain.spectral import leading_eigen

GEOMETRIES = ["inf ^ r=0", "inf ^ r=2", "inf ^ n=1 ^ r=1", "inf ^ n=2 v r=1", "inf v n=0 v r=2", "inf ^^^"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--lefts", default="10:18:1")
    ap.add_argument("--geometry", action="append")
    args = ap.parse_args(argv)

    res = leading_eigen(args.beta)
    lefts = parse_grid(args.lefts, int)
    print(f"beta={args.beta}  lambda={res.lam:.15g}")
    for geo in args.geometry or GEOMETRIES:
        pat = parse_geometry(geo)
        est, err, raw = enumerate_infinite_left(pat, 0.0, args.beta, lefts)
        closed = closed_form_infinite_left(pat, 0.0, res)
        print(f"\n{geo}  ({pat})")
        for l, v in zip(lefts, raw):
            print(f"  l={l:>3}  {v:.12f}")
        print(f"  extrapolated {est:.12f} +- {err:.1e}   closed form {closed:.12f}   diff {abs(est - closed):.1e}")


if __name__ == "__main__":
    main()
