"""Sweep A_sigma for one state and print the failure time of each value.

Used to pick the moderate/severe presets so that the Texas lifespans land
near 51/44/28 years.

    python scripts/calibrate_presets.py --state texas --values 10,5,4,3.5,3,2,1.7,1.5
"""
import argparse
import time

from tline.coupled_solver import run
from tline.scenario import Scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--state", default="texas")
    ap.add_argument("--values", default="10,5,4,3.5,3,2.5,2,1.7,1.5")
    ap.add_argument("--n-elements", type=int, default=1000)
    args = ap.parse_args()
    sc = Scenario.load(args.state)
    for a in (float(v) for v in args.values.split(",")):
        t0 = time.perf_counter()
        res = run(sc.with_overrides(damage=a).build_model(n_elements=args.n_elements))
        print(f"A_sigma={a:6.2f}  failure={res.failure_time}  ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
