"""Averaged error over y in [x, 2x] for several interval lengths h.

Prints the normalized aggregate sum_q E / (h x) and its per-modulus version,
with the per-sample oracle check on by default.
"""

import argparse
import time
import warnings

from shortprimes import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", type=float, default=1e6)
    ap.add_argument("--h", type=float, nargs="+", default=[1e3, 1e4, 1e5])
    ap.add_argument("--Q", type=int, default=30)
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--kind", choices=ex.KINDS, default="E")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--exact", action="store_true", help="also integrate exactly (slow for large x)")
    ap.add_argument("--no-oracle", action="store_true")
    args = ap.parse_args()
    warnings.simplefilter("ignore", ex.HypothesisWarning)
    print(f"{'h':>10} {'normalized':>12} {'stderr':>10} {'per_modulus':>12} {'mismatch':>9} {'exact':>10} {'secs':>7}")
    for h in args.h:
        cfg = ex.ExperimentConfig(x=args.x, h=h, Q=args.Q, samples=args.samples, seed=args.seed)
        start = time.perf_counter()
        rep = ex.averaged_error(cfg, args.kind, check_oracle=not args.no_oracle)
        exact = ex.averaged_error_exact(cfg, args.kind) if args.exact else float("nan")
        agg = rep.aggregate
        print(f"{h:10.4g} {agg['normalized']:12.5f} {agg['normalized_stderr']:10.5f} "
              f"{agg['normalized_per_modulus']:12.5f} {rep.mismatches:9d} {exact:10.5f} "
              f"{time.perf_counter() - start:7.1f}")


if __name__ == "__main__":
    main()
