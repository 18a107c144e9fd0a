"""Timing and agreement of exhaustive enumeration against the grid operator.

Enumeration cost doubles with every site; the grid cost grows linearly in k.

    python3 scripts/grid_vs_brute.py --k 10:24:2 --beta 0.5 --workers 4
"""

import argparse
import timeit

from fareychain.cli import parse_grid
from fareychain.partition import z_grid, z_knauf
from fareychain.spectral import _transfer_matrix


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", default="10:22:2")
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--x", type=float, default=0.0)
    ap.add_argument("--nodes", type=int, default=64)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"{'k':>3} {'brute_ms':>10} {'grid_ms':>9} {'speedup':>8} {'rel_diff':>9}")
    for k in parse_grid(args.k, int):
        def grid():
            _transfer_matrix.cache_clear()
            return z_grid(k + 1, args.beta, args.nodes)(args.x)

        def brute():
            return z_knauf(k, args.x, args.beta, workers=args.workers)

        tg = min(timeit.repeat(grid, number=1, repeat=args.repeat))
        tb = min(timeit.repeat(brute, number=1, repeat=args.repeat))
        g, b = grid(), brute()
        print(f"{k:>3} {tb * 1e3:>10.2f} {tg * 1e3:>9.3f} {tb / tg:>8.0f} {abs(g - b) / b:>9.1e}")


if __name__ == "__main__":
    main()
