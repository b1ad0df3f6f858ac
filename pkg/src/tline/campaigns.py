"""Campaign orchestration: fan deterministic runs over a worker pool and
fold the results into UQ statistics, failure curves and convergence data.

Workers only ever return per-realization arrays; every reduction happens
afterwards in realization index order, so outputs are identical for any
worker count.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import stochastic as st
from .coupled_solver import SolverError, run
from .scenario import Scenario

MC_SIZES = (100, 1000, 10000)


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class Job:
    overrides: dict
    n_steps: int | None = None
    field_at_end: bool = False


@dataclass
class Outcome:
    theta_max: np.ndarray
    failure_step: int | None
    theta_field: np.ndarray | None = None


def _execute(scenario: Scenario, sim: dict, job: Job) -> Outcome:
    with warnings.catch_warnings():
        # band clamping is reported once by deterministic runs; campaigns stay quiet
        warnings.simplefilter("ignore")
        res = run(scenario.build_model(job.overrides, **sim), n_steps=job.n_steps)
    field = res.final_state.theta.copy() if job.field_at_end else None
    return Outcome(res.theta_max.copy(), res.failure_step, field)


def _execute_packed(args):
    return _execute(*args)


def evaluate(scenario: Scenario, jobs, workers: int = 1, sim: dict | None = None) -> list[Outcome]:
    """Run ``jobs`` and return outcomes in job order."""
    sim = dict(sim or {})
    args = [(scenario, sim, j) for j in jobs]
    if workers <= 1 or len(args) <= 1:
        return [_execute_packed(a) for a in args]
    chunk = max(1, len(args) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute_packed, args, chunksize=chunk))


def padded_series(outcomes, n_steps: int) -> np.ndarray:
    """(runs, n_steps) theta_max with NaN after each run stopped."""
    out = np.full((len(outcomes), n_steps), np.nan)
    for i, o in enumerate(outcomes):
        out[i, :o.theta_max.size] = o.theta_max
    return out


def build_grid(scenario: Scenario, params=None, points: int | None = None) -> st.CollocationGrid:
    params = scenario.params if params is None else params
    nominal = scenario.nominal_values()
    rps = tuple(st.RandomParameter(p, nominal[p]) for p in params)
    return st.CollocationGrid(rps, scenario.points if points is None else points)


@dataclass
class GridCampaign:
    scenario: Scenario
    grid: st.CollocationGrid
    dt: float
    theta_lim: float
    series: np.ndarray          # (runs, n_steps), NaN-padded
    failure_steps: list

    @property
    def n_steps(self) -> int:
        return self.series.shape[1]

    @property
    def truncation(self) -> int:
        return st.truncation_index(self.series)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.n_steps + 1) * self.dt

    def statistics(self):
        """Mean, std and first-order Sobol of theta_max up to the earliest failure."""
        k = self.truncation
        q = self.series[:, :k]
        mean = st.expectation(self.grid, q)
        std = st.std_dev(self.grid, q, mean)
        sobol, low = st.sobol_first_order(self.grid, q)
        return {"t": self.t[:k], "mean": mean, "std": std, "sobol": sobol, "low_variance": low}

    def failure_curve(self) -> np.ndarray:
        return st.probability_of_failure(self.grid, st.bernoulli_transform(self.series, self.theta_lim))

    def manifest(self) -> dict:
        return {
            "parameters": [{"name": p.name, "mean": p.mean, "bounds": list(p.bounds)}
                           for p in self.grid.params],
            "points_per_dim": self.grid.n,
            "nodes": self.grid.nodes.tolist(),
            "weights": self.grid.probability_weights.tolist(),
            "failure_time": [None if s is None else s * self.dt for s in self.failure_steps],
            "truncation_step": self.truncation,
        }


def grid_campaign(scenario: Scenario, params=None, points=None, workers: int = 1,
                  n_steps: int | None = None, **sim) -> GridCampaign:
    grid = build_grid(scenario, params, points)
    cfg = scenario.build_model(**sim).config
    n = cfg.n_steps if n_steps is None else n_steps
    outs = evaluate(scenario, [Job(r, n) for r in grid.realizations()], workers, sim)
    return GridCampaign(scenario, grid, cfg.dt, cfg.theta_lim, padded_series(outs, n),
                        [o.failure_step for o in outs])


# -- PCM vs Monte Carlo ------------------------------------------------------

@dataclass
class ConvergenceStudy:
    param: str
    step: int
    reference_points: int
    rows: list   # (method, size, runs, relative_error)


def _field_outcomes(scenario, samples, step, workers, sim):
    outs = evaluate(scenario, [Job(s, step, True) for s in samples], workers, sim)
    for s, o in zip(samples, outs):
        if o.failure_step is not None:
            raise SolverError(f"realization {s} failed before the comparison step", o.failure_step)
    return np.array([o.theta_field for o in outs])


def convergence_study(scenario: Scenario, param: str = "I_b", step: int = 500,
                      pcm_points=range(2, 11), mc_sizes=MC_SIZES, reference_points: int = 100,
                      seed: int | None = None, workers: int = 1, **sim) -> ConvergenceStudy:
    """Relative L2 error of the mean temperature field at ``step`` for PCM with
    n points and MC with N samples, against a refined PCM reference.

    MC estimates of increasing size reuse prefixes of one seeded stream.
    """
    seed = scenario.seed if seed is None else seed

    def pcm_mean(n):
        grid = build_grid(scenario, (param,), n)
        return st.expectation(grid, _field_outcomes(scenario, grid.realizations(), step, workers, sim))

    ref = pcm_mean(reference_points)
    rows = []
    for n in pcm_points:
        rows.append(("pcm", n, n, st.relative_error(pcm_mean(n), ref)))
    if mc_sizes:
        rp = build_grid(scenario, (param,), 1).params
        samples = st.draw_samples(st.uniform_sampler(rp), max(mc_sizes), seed)
        fields = _field_outcomes(scenario, samples, step, workers, sim)
        for m in sorted(mc_sizes):
            mean = st._fold(np.full(m, 1.0 / m), fields[:m])
            rows.append(("mc", m, m, st.relative_error(mean, ref)))
    return ConvergenceStudy(param, step, reference_points, rows)
