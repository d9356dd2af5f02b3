"""Write the ordinates of the zeta zeros up to a height, with a completeness header.

mpmath.zetazero(n) returns the n-th zero in order of height, so listing
n = 1, 2, ... until the ordinate passes the height gives a complete list.
"""

import argparse
from pathlib import Path

import mpmath

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "shortprimes" / "data" / "zeta_zeros.txt"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--height", type=float, default=1000.0)
    ap.add_argument("--dps", type=int, default=25)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    mpmath.mp.dps = args.dps
    rows = []
    n = 1
    while True:
        rho = mpmath.zetazero(n)
        if rho.imag > args.height:
            break
        if abs(rho.real - 0.5) > 1e-20:
            raise SystemExit(f"zero {n} off the critical line: {rho}")
        rows.append(mpmath.nstr(rho.imag, 15, strip_zeros=False))
        n += 1
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w") as fh:
        fh.write("# zeros of the Riemann zeta function, ordinates only (beta = 1/2)\n")
        fh.write(f"# generated by mpmath.zetazero at {args.dps} digits\n")
        fh.write(f"# modulus=1 label=0 complete_to={args.height:g}\n")
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} zeros to {args.out}")


if __name__ == "__main__":
    main()
