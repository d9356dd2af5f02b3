"""Truncated explicit formula for psi(y + eta y) - psi(y) against the sieve.

The error of a sharp truncation at height T0 oscillates in y with size about
y / T0, so its value at a few fixed y need not fall as T0 grows.  Besides the
fixed points, this prints medians over log-uniform random y.
"""

import argparse

import numpy as np

from shortprimes import zeros


def errors(ds, ys, eta, heights):
    out = np.empty((len(ys), len(heights)))
    for i, y in enumerate(ys):
        direct = zeros.psi0_difference(float(y), eta * float(y))
        for j, T0 in enumerate(heights):
            out[i, j] = abs(zeros.explicit_formula_sum(ds, "1.0", float(y), eta, T0) - direct)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--y", type=float, nargs="+", default=[100, 500, 1000])
    ap.add_argument("--eta", type=float, default=0.5)
    ap.add_argument("--t0", type=float, nargs="+", default=[30, 50, 100, 200, 500])
    ap.add_argument("--random", type=int, default=200, help="log-uniform y in [100, 1000]")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ds = zeros.load_zeta_zeros()
    fixed = errors(ds, args.y, args.eta, args.t0)
    print("T0      " + " ".join(f"{t:>9g}" for t in args.t0))
    for y, row in zip(args.y, fixed):
        print(f"y={y:<6g}" + " ".join(f"{e:9.3f}" for e in row))
    print("median  " + " ".join(f"{e:9.3f}" for e in np.median(fixed, axis=0)))
    if args.random:
        ys = 10 ** np.random.default_rng(args.seed).uniform(2, 3, args.random)
        med = np.median(errors(ds, ys, args.eta, args.t0), axis=0)
        print(f"random {args.random} median " + " ".join(f"{e:9.3f}" for e in med))


if __name__ == "__main__":
    main()
