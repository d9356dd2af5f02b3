"""Fraction of pairs (q, n) whose every reduced class gets c h / phi(q) of log p.

Sweeps c and prints the empirical threshold curve; the first c is also
checked against the brute-force event sweep.
"""

import argparse

from shortprimes import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", type=float, default=1e6)
    ap.add_argument("--theta", type=float, default=0.4)
    ap.add_argument("--Q", type=int, default=3)
    ap.add_argument("--c", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0])
    args = ap.parse_args()
    cfg = ex.ExperimentConfig(x=args.x, theta=args.theta, Q=args.Q)
    first = ex.theorem3_pair_fraction(cfg, args.c[0])
    print(f"x={args.x:g} h={cfg.length:.2f} Q={args.Q}")
    print(f"c={args.c[0]:g}: {first.passes}/{first.total} passing, oracle {first.oracle_passes}")
    print(f"{'c':>6} {'fraction':>10}")
    for c, frac in ex.pair_threshold_curve(cfg, args.c):
        print(f"{c:6.3g} {frac:10.5f}")


if __name__ == "__main__":
    main()
