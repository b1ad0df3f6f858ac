"""PCM versus Monte Carlo error for the one-dimensional I_b problem.

    python scripts/convergence.py --out results/convergence
"""
import argparse
import sys

from tline.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/convergence")
    ap.add_argument("--step", default="500")
    ap.add_argument("--n-elements", default="200")
    ap.add_argument("--workers", default=None)
    args = ap.parse_args()
    argv = ["convergence", "--scenario", "texas", "--step", args.step, "--n-elements", args.n_elements,
            "--out", args.out]
    if args.workers:
        argv += ["--workers", args.workers]
    sys.exit(cli_main(argv))


if __name__ == "__main__":
    main()
