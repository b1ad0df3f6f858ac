"""Probability-of-failure curves for all four states and damage levels.

    python scripts/failure_curves.py --points 3 --out results/pf
"""
import argparse
import sys

from tline.cli import main as cli_main
from tline.scenario import PRESETS


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/pf")
    ap.add_argument("--points", default="3")
    ap.add_argument("--n-elements", default="200")
    ap.add_argument("--workers", default=None)
    args = ap.parse_args()
    argv = ["pf", "--points", args.points, "--n-elements", args.n_elements, "--out", args.out]
    for state in PRESETS:
        argv += ["--scenario", state]
    if args.workers:
        argv += ["--workers", args.workers]
    sys.exit(cli_main(argv))


if __name__ == "__main__":
    main()
