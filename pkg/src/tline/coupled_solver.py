"""Staggered thermo-electro-mechanical time stepping.

Each step solves, in order: horizontal tension from the sag model (driven by
the previous mean conductor temperature), displacement, strain-energy
history, damage, fatigue, temperature (Joule source from the previous
voltage field) and voltage. A run stops when the peak conductor temperature
exceeds ``theta_lim``.

Two engines share this discretisation: ``engine="numpy"`` goes through the
``fem1d`` routines below one operator at a time, ``engine="numba"`` runs the
whole loop in the compiled kernel of :mod:`tline._kernel`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import fem1d
from .cable_geometry import (CableGeometry, GeometryError, SagParams, WindLoadParams,
                             area_profile, drag_coefficient, horizontal_tension, wind_load,
                             wind_pressure)
from .loading import LoadingModel, LoadSample

# (Re_min, Re_max, C, m) for cross flow over a cylinder
NUSSELT_TABLE = (
    (0.4, 4.0, 0.989, 0.330),
    (4.0, 40.0, 0.911, 0.385),
    (40.0, 4.0e3, 0.683, 0.466),
    (4.0e3, 4.0e4, 0.193, 0.618),
    (4.0e4, 4.0e5, 0.027, 0.805),
)


class SolverError(RuntimeError):
    def __init__(self, msg, step=None, partial=None):
        super().__init__(msg if step is None else f"step {step}: {msg}")
        self.step = step
        self.partial = partial   # SimulationResult up to the last good step, if known


class NusseltRangeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class MaterialParams:
    young: float = 69e9
    gamma: float = 0.02
    g_c: float = 1.0e4
    rho: float = 2700.0
    aging: float = 1.0e-10       # m^5 / (y kg)
    kappa: float = 237.0
    sigma_e0: float = 3.77e7
    alpha_res: float = 3.9e-3
    theta0: float = 293.15
    rho_air: float = 1.225
    nu_air: float = 15e-6
    kappa_air: float = 0.0295
    prandtl: float = 0.71
    h_min: float = 5.0           # natural convection floor, W/(m^2 K)
    degradation_floor: float = 1e-6

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SimulationConfig:
    dt: float = 0.01
    n_steps: int = 6000
    theta_lim: float = 373.0
    steps_per_year: int = 100
    n_elements: int = 1000
    snapshot_every: int = 500

    def __post_init__(self):
        if not math.isclose(self.dt * self.steps_per_year, 1.0):
            raise ValueError("dt * steps_per_year must equal one year")
        if self.n_steps < 1 or self.n_elements < 2:
            raise ValueError("need n_steps >= 1 and n_elements >= 2")


@dataclass(frozen=True)
class LineModel:
    """Everything a deterministic run needs."""

    geometry: CableGeometry
    material: MaterialParams
    sag: SagParams
    wind: WindLoadParams
    loading: LoadingModel
    config: SimulationConfig = SimulationConfig()


@dataclass
class FieldState:
    u: np.ndarray
    phi: np.ndarray
    fatigue: np.ndarray
    theta: np.ndarray
    voltage: np.ndarray
    hist: np.ndarray
    step: int = 0
    tension: float = 0.0

    @classmethod
    def pristine(cls, n_nodes: int, theta_init: float) -> "FieldState":
        z = np.zeros(n_nodes)
        return cls(z.copy(), z.copy(), z.copy(), np.full(n_nodes, float(theta_init)), z.copy(), z.copy())

    def copy(self) -> "FieldState":
        return FieldState(self.u.copy(), self.phi.copy(), self.fatigue.copy(), self.theta.copy(),
                          self.voltage.copy(), self.hist.copy(), self.step, self.tension)

    @property
    def damage(self) -> np.ndarray:
        """Damage as reported: clipped to [0, 1]."""
        return np.clip(self.phi, 0.0, 1.0)


@dataclass
class SimulationResult:
    t: np.ndarray
    phi_max: np.ndarray
    fatigue_max: np.ndarray
    theta_max: np.ndarray
    voltage_drop: np.ndarray
    tension: np.ndarray
    failure_time: float | None
    failure_step: int | None
    snapshots: dict = field(default_factory=dict)   # step -> FieldState
    final_state: FieldState | None = None
    max_residual: float = 0.0
    nodes: np.ndarray | None = None

    @property
    def failed(self) -> bool:
        return self.failure_step is not None


class Discretization:
    """Mesh plus cross-section data at nodes and Gauss points."""

    def __init__(self, geometry: CableGeometry, n_elements: int):
        self.geometry = geometry
        self.mesh = fem1d.Mesh1D(geometry.length, n_elements)
        self.area_g = area_profile(geometry, self.mesh.gauss_points)
        self.area_nodes = area_profile(geometry, self.mesh.nodes)
        self.perimeter = geometry.perimeter


# -- material laws ---------------------------------------------------------

def degradation(phi, floor: float = 1e-6):
    """(1 - phi)^2 on the clipped damage, floored to keep systems nonsingular."""
    return np.maximum((1.0 - np.clip(phi, 0.0, 1.0)) ** 2, floor)


def conductivity(phi, theta, mat: MaterialParams):
    return degradation(phi, mat.degradation_floor) * mat.sigma_e0 / (1.0 + mat.alpha_res * (theta - mat.theta0))


def nusselt_band(re: float):
    if re < NUSSELT_TABLE[0][0]:
        return NUSSELT_TABLE[0], -1
    for band in NUSSELT_TABLE:
        if band[0] <= re < band[1]:
            return band, 0
    if re == NUSSELT_TABLE[-1][1]:
        return NUSSELT_TABLE[-1], 0
    return NUSSELT_TABLE[-1], 1


def convective_h(v: float, diameter: float, mat: MaterialParams, warn: bool = True) -> float:
    """Forced-convection coefficient from Nu = C Re^m Pr^(1/3), floored at h_min."""
    if v <= 0:
        return mat.h_min
    re = v * diameter / mat.nu_air
    (_, _, c, m), out = nusselt_band(re)
    if out and warn:
        import warnings
        side = "below" if out < 0 else "above"
        warnings.warn(f"Re={re:.4g} {side} Nusselt table, clamped to nearest band",
                      NusseltRangeWarning, stacklevel=2)
    nu = c * re ** m * mat.prandtl ** (1.0 / 3.0)
    return max(nu * mat.kappa_air / diameter, mat.h_min)


# -- single-field solves -----------------------------------------------------

def solve_displacement(state: FieldState, tension: float, disc: Discretization, mat: MaterialParams,
                       body_force: float = 0.0) -> np.ndarray:
    mesh = disc.mesh
    phig = mesh.interpolate(state.phi)
    kg = degradation(phig, mat.degradation_floor) * mat.young * disc.area_g
    sys_ = fem1d.GlobalSystem(*fem1d.stiffness_bands(mesh, kg))
    # gradient-squared damage force; int A dx per element from the Gauss rule
    dphi = mesh.gradient(state.phi)
    ge = mat.gamma * mat.g_c * dphi ** 2 * disc.area_g.sum(axis=1) * 0.5 * mesh.h
    sys_.rhs = fem1d.gradient_load_vector(mesh, ge)
    if body_force:
        sys_.rhs += fem1d.load_vector(mesh, body_force * disc.area_g)
    sys_ = fem1d.apply_point_load(sys_, -1, tension)
    sys_ = fem1d.apply_dirichlet(sys_, 0, 0.0)
    return fem1d.solve(sys_, "m").values


def nodal_strain(u: np.ndarray, disc: Discretization) -> np.ndarray:
    return disc.mesh.nodal_average(disc.mesh.gradient(u))


def update_history(state: FieldState, disc: Discretization, mat: MaterialParams) -> np.ndarray:
    eps = nodal_strain(state.u, disc)
    return np.maximum(state.hist, mat.young * eps * eps)


def solve_damage(state: FieldState, disc: Discretization, mat: MaterialParams) -> np.ndarray:
    mesh = disc.mesh
    ag = disc.area_g
    hg = mesh.interpolate(state.hist)
    fg = mesh.interpolate(state.fatigue)
    kd, ko = fem1d.stiffness_bands(mesh, np.broadcast_to(mat.gamma * mat.g_c * ag, ag.shape))
    md, mo = fem1d.mass_bands(mesh, (hg + mat.g_c / mat.gamma) * ag)
    rhs = fem1d.load_vector(mesh, (hg + fg / mat.gamma) * ag)
    return fem1d.solve(fem1d.GlobalSystem(kd + md, ko + mo, rhs)).values


def fatigue_rate_density(phi, theta, strain_abs, mat: MaterialParams):
    """Pointwise dF/dt = rho a (theta/theta0)(1 - phi) Y |u'| phi / gamma (phi clipped)."""
    p = np.clip(phi, 0.0, 1.0)
    return mat.rho * mat.aging * (theta / mat.theta0) * (1.0 - p) * mat.young * strain_abs * p / mat.gamma


def update_fatigue(state: FieldState, disc: Discretization, mat: MaterialParams, dt: float) -> np.ndarray:
    mesh = disc.mesh
    ag = disc.area_g
    rate_g = fatigue_rate_density(mesh.interpolate(state.phi), mesh.interpolate(state.theta),
                                  np.abs(mesh.gradient(state.u))[:, None], mat)
    w = fem1d.load_vector(mesh, rate_g * ag)
    md, mo = fem1d.mass_bands(mesh, ag)
    incr = fem1d.solve(fem1d.GlobalSystem(md, mo, dt * w)).values
    return state.fatigue + incr


def joule_source(state: FieldState, disc: Discretization, mat: MaterialParams) -> np.ndarray:
    """Gauss values of sigma_E A (V')^2 from the stored voltage field."""
    mesh = disc.mesh
    sig = conductivity(mesh.interpolate(state.phi), mesh.interpolate(state.theta), mat)
    dv = mesh.gradient(state.voltage)[:, None]
    return sig * disc.area_g * dv * dv


def solve_temperature(state: FieldState, load: LoadSample, disc: Discretization, mat: MaterialParams,
                      h: float | None = None, source: np.ndarray | None = None) -> np.ndarray:
    """Steady heat balance. ``source`` holds Joule heating at the Gauss points;
    by default it is computed from ``state``'s voltage, damage and temperature."""
    mesh = disc.mesh
    if source is None:
        source = joule_source(state, disc, mat)
    if h is None:
        h = convective_h(load.wind_speed, disc.geometry.diameter, mat)
    ag = disc.area_g
    kd, ko = fem1d.stiffness_bands(mesh, mat.kappa * ag)
    hp = np.full(ag.shape, h * disc.perimeter)
    md, mo = fem1d.mass_bands(mesh, hp)
    rhs = fem1d.load_vector(mesh, source + hp * load.ambient_temp)
    return fem1d.solve(fem1d.GlobalSystem(kd + md, ko + mo, rhs), "K").values


def solve_voltage(state: FieldState, current: float, disc: Discretization, mat: MaterialParams) -> np.ndarray:
    mesh = disc.mesh
    sig = conductivity(mesh.interpolate(state.phi), mesh.interpolate(state.theta), mat)
    sys_ = fem1d.GlobalSystem(*fem1d.stiffness_bands(mesh, sig * disc.area_g))
    sys_ = fem1d.apply_point_load(sys_, -1, current)
    sys_ = fem1d.apply_dirichlet(sys_, 0, 0.0)
    return fem1d.solve(sys_, "V").values


# -- stepping ---------------------------------------------------------------

@dataclass(frozen=True)
class StepLoads:
    """Per-step environmental data, precomputed from the loading model."""

    t: np.ndarray
    wind: np.ndarray     # m/s
    ambient: np.ndarray  # K
    current: np.ndarray  # A
    h: np.ndarray        # W/(m^2 K)
    wind_load: np.ndarray  # N/m


def step_loads(model: LineModel, n_steps: int | None = None) -> StepLoads:
    cfg = model.config
    n = cfg.n_steps if n_steps is None else n_steps
    t = np.arange(1, n + 1) * cfg.dt
    wind, amb, cur = model.loading.series(t)
    d = model.geometry.diameter
    mat = model.material
    h = np.array([convective_h(v, d, mat) for v in wind])
    ww = np.array([wind_load(model.wind, wind_pressure(model.wind.rho_air, v), d, v=v, nu=mat.nu_air)
                   for v in wind])
    return StepLoads(t, wind, amb, cur, h, ww)


def initial_state(model: LineModel, disc: Discretization) -> FieldState:
    return FieldState.pristine(disc.mesh.n_nodes, model.loading.ambient(0.0))


def step(model: LineModel, state: FieldState, disc: Discretization, loads: StepLoads) -> FieldState:
    """Advance one step with the reference (numpy) engine. ``state.step`` is the
    index of the last completed step; loads are read at index ``state.step``."""
    k = state.step
    mat = model.material
    s = state.copy()
    # lagged coupling: Joule heating from the voltage solved at the previous step
    q_joule = joule_source(state, disc, mat)
    try:
        s.tension = horizontal_tension(model.sag, float(np.mean(state.theta)), float(loads.wind_load[k]))
        s.u = solve_displacement(s, s.tension, disc, mat)
        s.hist = update_history(s, disc, mat)
        s.phi = solve_damage(s, disc, mat)
        s.fatigue = update_fatigue(s, disc, mat, model.config.dt)
        sample = LoadSample(float(loads.t[k]), float(loads.wind[k]), float(loads.ambient[k]),
                            float(loads.current[k]))
        s.theta = solve_temperature(s, sample, disc, mat, h=float(loads.h[k]), source=q_joule)
        s.voltage = solve_voltage(s, sample.current, disc, mat)
    except (fem1d.FEMError, GeometryError) as exc:
        raise SolverError(str(exc), k + 1) from exc
    s.step = k + 1
    return s


def _run_numpy(model: LineModel, n_steps: int, loads: StepLoads, disc: Discretization) -> SimulationResult:
    cfg = model.config
    state = initial_state(model, disc)
    cols = np.full((6, n_steps), np.nan)
    snaps = {}
    fail = None
    for k in range(n_steps):
        try:
            state = step(model, state, disc, loads)
        except SolverError as exc:
            exc.partial = SimulationResult(*cols[:, :k], failure_time=None, failure_step=None,
                                           snapshots=snaps, final_state=state, nodes=disc.mesh.nodes)
            raise
        cols[:, k] = (loads.t[k], state.damage.max(), state.fatigue.max(), state.theta.max(),
                      abs(state.voltage[-1]), state.tension)
        if cfg.snapshot_every and state.step % cfg.snapshot_every == 0:
            snaps[state.step] = state.copy()
        if state.theta.max() > cfg.theta_lim:
            fail = state.step
            break
    m = k + 1
    return SimulationResult(*cols[:, :m], failure_time=None if fail is None else fail * cfg.dt,
                            failure_step=fail, snapshots=snaps, final_state=state, nodes=disc.mesh.nodes)


def run(model: LineModel, engine: str = "numba", n_steps: int | None = None) -> SimulationResult:
    cfg = model.config
    n = cfg.n_steps if n_steps is None else n_steps
    disc = Discretization(model.geometry, cfg.n_elements)
    loads = step_loads(model, n)
    if engine == "numpy":
        return _run_numpy(model, n, loads, disc)
    if engine == "numba":
        from ._kernel import run_compiled
        return run_compiled(model, n, loads, disc)
    raise ValueError(f"unknown engine {engine!r}")
