"""Hole probability across a window of radii, with the fitted decay exponent.

    python scripts/hole_decay.py --trials 1000000 --seed 7 --out holes.csv
"""
import argparse
import math
import sys

from geflab import cli
from geflab.experiments import default_workers, estimate_event_probability, fit_decay_exponent, log_prob_omega


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radii", default="0.6,0.8,1.0,1.2,1.4")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=default_workers())
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    rows, pts = [], []
    for r in (float(t) for t in args.radii.split(",")):
        est = estimate_event_probability("hole", r, None, args.trials, args.seed, args.workers)
        rows.append(est.as_row())
        if 0 < est.p_hat < 1:
            pts.append((r, -est.log_p_hat))
        lower = f"{log_prob_omega(r):.2f}" if r >= 1 else "n/a"
        print(f"r={r:<4} p_hat={est.p_hat:.6f}  -log p/r^2={-est.log_p_hat / r**2:.4f}  "
              f"-log p/r^4={-est.log_p_hat / r**4:.4f}  log P(omega)={lower}", file=sys.stderr)
    if len(pts) >= 3:
        fit = fit_decay_exponent(pts)
        rows.append(fit.as_row("fit"))
        print(f"fitted exponent {fit.exponent:.3f} (amplitude {fit.amplitude:.3f})", file=sys.stderr)
    text = cli.render(cli.HOLES_FIELDS, rows, "csv")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
