"""Texas five-parameter Sobol campaign on the reduced mesh; prints the
first-order indices every five years and writes the full table.

    python scripts/sobol_texas.py --out results/sobol_texas --workers 4
"""
import argparse
import sys

from tline.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/sobol_texas")
    ap.add_argument("--workers", default=None)
    ap.add_argument("--n-elements", default="200")
    ap.add_argument("--points", default="5")
    args = ap.parse_args()
    argv = ["uq", "--scenario", "texas", "--params", "g_c,a,theta_b,w_b,I_b", "--points", args.points,
            "--n-elements", args.n_elements, "--out", args.out]
    if args.workers:
        argv += ["--workers", args.workers]
    code = cli_main(argv)
    if code:
        sys.exit(code)
    import numpy as np
    data = np.genfromtxt(f"{args.out}/sobol.csv", delimiter=",", names=True)
    names = [n for n in data.dtype.names if n.startswith("S_")]
    print("t  " + "  ".join(names))
    for row in data[499::500]:
        print(f"{row['t']:5.1f}  " + "  ".join(f"{row[n]:.3f}" for n in names))


if __name__ == "__main__":
    main()
