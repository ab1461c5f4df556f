"""Zeno scan: deviation and n * (in-subspace angle) for repeated rotate-and-project.

    python scripts/zeno_scan.py --theta 0 --phi 0.785 --out zeno.csv
"""
import argparse
import csv

import numpy as np

from linkanneal.oneway import zeno_scan


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=np.pi / 4)
    p.add_argument("--out", default="zeno_scan.csv")
    args = p.parse_args()

    ns = np.unique(np.logspace(0, 5, 26).astype(int))
    rows = zeno_scan(args.theta, args.phi, ns)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "deviation", "scaled"])
        w.writerows(rows)
    for n, dev, scaled in rows:
        print(f"{n:>7d} {dev:.4e} {scaled:.6f}")
    print(f"phi^2 = {args.phi ** 2:.6f}")


if __name__ == "__main__":
    main()
