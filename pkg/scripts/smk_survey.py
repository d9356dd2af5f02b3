"""Share of pairs (m, k) whose Hasse interval holds a prime p = 1 mod m, by m."""

import argparse

from shortprimes import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, default=40)
    ap.add_argument("--K", type=int, default=2000)
    args = ap.parse_args()
    table = ex.smk_table(args.M, args.K)
    print(f"S({args.M}, {args.K}) = {int(table.sum())} of {table.size}")
    print(f"{'m':>4} {'share':>8} {'missing k (first 8)':>24}")
    for m in range(1, args.M + 1):
        row = table[m - 1]
        missing = (row == 0).nonzero()[0][:8] + 1
        print(f"{m:4d} {row.mean():8.4f}  {missing.tolist()}")


if __name__ == "__main__":
    main()
