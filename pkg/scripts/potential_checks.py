"""Jensen residuals, Poisson probe deviations and circle-mean statistics.

    python scripts/potential_checks.py --r 3 --samples 2000
"""
import argparse
import math

import numpy as np

from geflab.complex_gaussian import derive_trial_rng
from geflab.experiments import estimate_event_probability
from geflab.gef_core import sample_gef
from geflab.potential import jensen_residual, make_probe, probe_deviation


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r", type=float, default=3.0)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    r = args.r

    res = [jensen_residual(sample_gef(2.0, derive_trial_rng(args.seed, 8, i)), 2.0) for i in range(50)]
    print(f"jensen residual at r=2: max {max(res):.2e}, mean {np.mean(res):.2e}")

    print("delta  n_discs  center  corner  random(max of 20)  random/sqrt(delta)")
    for di, delta in enumerate((0.25, 0.09, 0.04, 0.01, 0.0025)):
        center = probe_deviation(make_probe(delta, 1.0, "center"))
        corner = probe_deviation(make_probe(delta, 1.0, "corner"))
        rand = max(probe_deviation(make_probe(delta, 1.0, "random", derive_trial_rng(args.seed, 100 + di, i)))
                   for i in range(20))
        n = make_probe(delta, 1.0, "center").n_discs
        print(f"{delta:<6} {n:<8} {center:.1e} {corner:.1e}  {rand:.4f}  {rand / math.sqrt(delta):.4f}")

    for event, delta in (("circle_mean_low", 0.25), ("abs_mean_high", None), ("logM_deviation", 0.25),
                         ("claim32_failure", 0.25)):
        trials = args.samples if event != "claim32_failure" else min(args.samples, 500)
        est = estimate_event_probability(event, r, delta, trials, args.seed)
        print(f"{event:<16} r={r} delta={delta}  frequency {est.p_hat:.2e}  95% CI [{est.ci_low:.1e}, {est.ci_high:.1e}]")


if __name__ == "__main__":
    main()
