"""Distribution of n(r), the number of zeros in the disc of radius r.

Prints the empirical mean and variance of n(r) and the deviation
probability P(|n(r)/r^2 - 1| >= delta). Because n(r) is an integer, the
deviation event jumps whenever r^2 (1 +- delta) crosses an integer.
"""
import argparse

import numpy as np

from geflab.experiments import default_workers, zero_counts


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", default="1,1.5,2,2.5")
    ap.add_argument("--delta", type=float, default=0.25)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=6)
    ap.add_argument("--workers", type=int, default=default_workers())
    args = ap.parse_args(argv)

    print("r,mean,var,uncertain,allowed_counts,p_deviation")
    for r in (float(t) for t in args.radii.split(",")):
        n = zero_counts(r, args.trials, args.seed, workers=args.workers)
        cert = n[n >= 0]
        lo, hi = r * r * (1 - args.delta), r * r * (1 + args.delta)
        allowed = [k for k in range(int(hi) + 2) if lo < k < hi]
        p = np.mean(np.abs(cert / (r * r) - 1) >= args.delta)
        print(f"{r},{cert.mean():.5f},{cert.var():.5f},{n.size - cert.size},"
              f"{'/'.join(map(str, allowed))},{p:.5f}")


if __name__ == "__main__":
    main()
