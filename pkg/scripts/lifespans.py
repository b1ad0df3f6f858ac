"""Failure time of every bundled state at each damage preset.

    python scripts/lifespans.py [--n-elements 1000]
"""
import argparse

from tline.coupled_solver import run
from tline.scenario import DAMAGE_LEVELS, PRESETS, Scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-elements", type=int, default=1000)
    args = ap.parse_args()
    print("state," + ",".join(DAMAGE_LEVELS))
    for state in PRESETS:
        sc = Scenario.load(state)
        row = []
        for dmg in DAMAGE_LEVELS:
            res = run(sc.with_overrides(damage=dmg).build_model(n_elements=args.n_elements))
            row.append("none" if res.failure_time is None else f"{res.failure_time:.2f}")
        print(state + "," + ",".join(row), flush=True)


if __name__ == "__main__":
    main()
