"""Command line entry point: ``tline simulate|uq|pf|convergence``.

Exit codes: 0 success, 2 configuration error, 3 solver error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import campaigns
from .cable_geometry import GeometryError
from .coupled_solver import SolverError
from .fem1d import FEMError
from .loading import WeatherDataError
from .scenario import DAMAGE_LEVELS, ConfigError, Scenario, parse_params

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
FIELD_NAMES = ("u", "phi", "fatigue", "theta", "voltage", "hist")


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "unknown"


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header, columns):
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0]) if cols else 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(c[i] if c.dtype.kind in "US" else fmt(c[i]) for c in cols) + "\n")


def write_json(path: Path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest(args, scenarios, started) -> dict:
    return {
        "command": args.command,
        "argv": list(args.argv),
        "version": _version(),
        "seed": scenarios[0].seed,
        "workers": _workers(scenarios[0]),
        "scenarios": [s.to_dict() for s in scenarios],
        "simulation_overrides": _sim_overrides(args),
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def _sim_overrides(args) -> dict:
    out = {}
    if getattr(args, "n_elements", None):
        out["n_elements"] = args.n_elements
    if getattr(args, "steps", None):
        out["n_steps"] = args.steps
    if getattr(args, "theta_lim", None) is not None:
        out["theta_lim"] = args.theta_lim
    return out


def _scenario(path, args, damage=None) -> Scenario:
    sc = Scenario.load(path)
    kw = {}
    if args.params is not None:
        kw["params"] = parse_params(args.params)
    for key in ("points", "seed", "workers", "out"):
        if getattr(args, key, None) is not None:
            kw[key] = getattr(args, key)
    if damage is not None:
        kw["damage"] = damage
    elif getattr(args, "damage", None):
        kw["damage"] = _damage_value(args.damage[0] if isinstance(args.damage, list) else args.damage)
    return sc.with_overrides(**kw) if kw else sc


def _workers(sc: Scenario) -> int:
    return sc.workers or campaigns.default_workers()


def _damage_value(text):
    try:
        return float(text)
    except (TypeError, ValueError):
        return text


def _outdir(args, sc: Scenario) -> Path:
    out = Path(args.out or sc.out or f"results/{args.command}-{sc.name}")
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands ----------------------------------------------------------------

def _emit_simulation(out: Path, res, model):
    write_csv(out / "timeseries.csv", ("t", "phi_max", "fatigue_max", "theta_max", "voltage_drop", "tension"),
              (res.t, res.phi_max, res.fatigue_max, res.theta_max, res.voltage_drop, res.tension))
    snapdir = out / "snapshots"
    snapdir.mkdir(exist_ok=True)
    for stp, state in sorted(res.snapshots.items()):
        years = stp * model.config.dt
        write_csv(snapdir / f"snapshot_{int(round(years)):03d}y.csv", ("x",) + FIELD_NAMES,
                  (res.nodes,) + tuple(getattr(state, f) for f in FIELD_NAMES))


def cmd_simulate(args) -> int:
    sc = _scenario(args.scenario[0], args)
    out = _outdir(args, sc)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    model = sc.build_model(**_sim_overrides(args))
    from .coupled_solver import run
    summary = {"scenario": sc.name, "a_sigma": sc.a_sigma, "n_elements": model.config.n_elements}
    try:
        res = run(model, engine=args.engine)
    except (SolverError, FEMError) as exc:
        partial = getattr(exc, "partial", None)
        if partial is not None:
            _emit_simulation(out, partial, model)
        summary.update(status="solver_error", error=str(exc), step=getattr(exc, "step", None),
                       completed_steps=0 if partial is None else int(partial.t.size))
        write_json(out / "summary.json", summary)
        write_json(out / "manifest.json", _manifest(args, [sc], started))
        raise
    _emit_simulation(out, res, model)
    summary.update(status="failed" if res.failed else "survived",
                   failure_time=res.failure_time, failure_step=res.failure_step,
                   steps=int(res.t.size), theta_max=float(res.theta_max.max()),
                   phi_max=float(res.phi_max.max()), voltage_drop_final=float(res.voltage_drop[-1]),
                   max_relative_residual=float(res.max_residual))
    write_json(out / "summary.json", summary)
    write_json(out / "manifest.json", _manifest(args, [sc], started))
    ft = "none" if res.failure_time is None else f"{res.failure_time:.2f} y"
    print(f"{sc.name} (A_sigma={sc.a_sigma:g}): failure time {ft}; results in {out}")
    return EXIT_OK


def cmd_uq(args) -> int:
    sc = _scenario(args.scenario[0], args)
    out = _outdir(args, sc)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    camp = campaigns.grid_campaign(sc, workers=_workers(sc), **_sim_overrides(args))
    stats = camp.statistics()
    write_csv(out / "mean.csv", ("t", "theta_max_mean"), (stats["t"], stats["mean"]))
    write_csv(out / "std.csv", ("t", "theta_max_std"), (stats["t"], stats["std"]))
    names = [p.name for p in camp.grid.params]
    write_csv(out / "sobol.csv", ("t",) + tuple(f"S_{n}" for n in names) + ("low_variance",),
              (stats["t"],) + tuple(stats["sobol"]) + (stats["low_variance"].astype(float),))
    write_json(out / "campaign.json", camp.manifest())
    write_json(out / "manifest.json", _manifest(args, [sc], started))
    print(f"{sc.name}: {camp.grid.size} realizations, statistics up to t={stats['t'][-1]:.2f} y; results in {out}")
    return EXIT_OK


def cmd_pf(args) -> int:
    damages = [_damage_value(d) for d in (args.damage or DAMAGE_LEVELS)]
    scs = [_scenario(path, args, damage=d) for path in args.scenario for d in damages]
    out = _outdir(args, scs[0])
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    curves = {}
    t = None
    for sc in scs:
        camp = campaigns.grid_campaign(sc, workers=_workers(sc), **_sim_overrides(args))
        key = f"{sc.name}_{sc.damage}"
        pf = camp.failure_curve()
        curves[key] = pf
        t = camp.t
        write_csv(out / f"pf_{key}.csv", ("t", "p_f"), (camp.t, pf))
        write_json(out / f"campaign_{key}.json", camp.manifest())
        print(f"{key}: p_f(end) = {pf[-1]:.4f}")
    write_csv(out / "pf_combined.csv", ("t",) + tuple(curves), (t,) + tuple(curves.values()))
    write_json(out / "manifest.json", _manifest(args, scs, started))
    return EXIT_OK


def cmd_convergence(args) -> int:
    sc = _scenario(args.scenario[0], args)
    out = _outdir(args, sc)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    study = campaigns.convergence_study(sc, param=args.param, step=args.step,
                                        reference_points=args.reference_points,
                                        workers=_workers(sc), **_sim_overrides(args))
    method, size, runs, err = zip(*study.rows)
    write_csv(out / "convergence.csv", ("method", "size", "runs", "relative_error"),
              (np.array(method), np.array(size), np.array(runs), np.array(err)))
    write_json(out / "manifest.json", _manifest(args, [sc], started))
    for row in study.rows:
        print(f"{row[0]:>4} {row[1]:>6d}  {row[3]:.3e}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "uq": cmd_uq, "pf": cmd_pf, "convergence": cmd_convergence}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tline", description="Coupled degradation model of an overhead line.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", action="append", required=True,
                       help="scenario YAML file or preset name (repeatable for pf)")
        p.add_argument("--params", default=None, help="comma-separated random parameters")
        p.add_argument("--points", type=int, default=None, help="collocation points per dimension")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--n-elements", type=int, default=None, help="mesh size override")
        p.add_argument("--steps", type=int, default=None, help="number of time steps")
        p.add_argument("--theta-lim", type=float, default=None)
        if name == "pf":
            p.add_argument("--damage", action="append", default=None,
                           help="damage level or A_sigma value (repeatable; default all presets)")
        else:
            p.add_argument("--damage", default=None, help="damage level or A_sigma value")
        if name == "simulate":
            p.add_argument("--engine", choices=("numba", "numpy"), default="numba")
        if name == "convergence":
            p.add_argument("--param", default="I_b")
            p.add_argument("--step", type=int, default=500, help="comparison time step")
            p.add_argument("--reference-points", type=int, default=100)
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, WeatherDataError, GeometryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, FEMError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
