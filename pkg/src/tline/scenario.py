"""Scenario configuration: YAML documents with an ``include`` mechanism.

A scenario file is a mapping. ``include: other.yaml`` (or a list) pulls in
shared blocks first; keys in the including file override them, nested
mappings are merged key by key. Relative paths resolve against the file that
names them. Bundled presets (``texas``, ``california``, ``michigan``,
``florida``) can be referenced by name.
"""
from __future__ import annotations

import copy
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import yaml

from .cable_geometry import CableGeometry, GeometryError, SagParams, WindLoadParams, check_drag_table
from .coupled_solver import LineModel, MaterialParams, SimulationConfig
from .loading import CurrentLoad, LoadingModel, WeatherDataError, WeatherSeries, ingest_weather_csv

PRESETS = ("texas", "california", "michigan", "florida")
DAMAGE_LEVELS = ("minimal", "moderate", "severe")
RANDOM_PARAMETERS = ("A_sigma", "gamma", "g_c", "a", "theta_b", "w_b", "I_b", "I_a")
KELVIN = 273.15
ENV_PREFIX = "TLINE_"


class ConfigError(ValueError):
    pass


def data_dir() -> Path:
    return Path(str(resources.files("tline") / "data"))


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_document(path, _seen=()) -> dict:
    path = Path(path).resolve()
    if path in _seen:
        raise ConfigError(f"include cycle at {path}")
    if not path.is_file():
        raise ConfigError(f"scenario file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    if "weather" in doc and not Path(str(doc["weather"])).is_absolute():
        doc["weather"] = str(path.parent / str(doc["weather"]))
    incs = doc.pop("include", [])
    incs = [incs] if isinstance(incs, str) else list(incs)
    merged: dict = {}
    for inc in incs:
        merged = _merge(merged, load_document(path.parent / inc, _seen + (path,)))
    doc = _merge(merged, doc)
    return doc


def resolve_scenario_path(name_or_path) -> Path:
    p = Path(str(name_or_path))
    if p.suffix in (".yaml", ".yml") or p.exists():
        return p
    if str(name_or_path).lower() in PRESETS:
        return data_dir() / f"{str(name_or_path).lower()}.yaml"
    raise ConfigError(f"unknown scenario {name_or_path!r} (not a file or preset {PRESETS})")


def _checked(d: dict, cls) -> dict:
    names = {f.name: f for f in fields(cls)}
    out = {}
    for k, v in (d or {}).items():
        if k not in names:
            raise ConfigError(f"unknown {cls.__name__} key {k!r}")
        out[k] = v
    return out


@dataclass(frozen=True)
class SagSettings:
    ultimate_strength: float = 185000.0
    pretension_fraction: float = 0.2
    alpha_l: float = 2.3e-5
    theta_ref: float | None = None   # defaults to material theta0


@dataclass(frozen=True)
class Scenario:
    name: str
    weather: str
    length: float = 200.0
    diameter: float = 0.04
    material: MaterialParams = MaterialParams()
    sag: SagSettings = SagSettings()
    wind: WindLoadParams = WindLoadParams()
    current: CurrentLoad = CurrentLoad(1500.0, 100.0)
    simulation: SimulationConfig = SimulationConfig()
    damage: str | float = "minimal"
    damage_presets: tuple = (("minimal", 10.0), ("moderate", 3.5), ("severe", 1.7))
    params: tuple = ("g_c", "a", "theta_b", "w_b", "I_b")
    points: int = 5
    seed: int = 20240611
    workers: int | None = None   # None: use all available cores
    out: str | None = None

    # -- construction -----------------------------------------------------
    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        doc = dict(doc)
        try:
            geom = doc.pop("geometry", {}) or {}
            kw = dict(
                name=str(doc.pop("name", "scenario")),
                weather=str(doc.pop("weather")),
                length=float(geom.get("length", 200.0)),
                diameter=float(geom.get("diameter", 0.04)),
                material=MaterialParams(**{k: float(v) for k, v in _checked(doc.pop("material", {}), MaterialParams).items()}),
                sag=SagSettings(**{k: (None if v is None else float(v))
                                   for k, v in _checked(doc.pop("sag", {}), SagSettings).items()}),
                simulation=_simulation(doc.pop("simulation", {})),
            )
        except KeyError as exc:
            raise ConfigError(f"missing required key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        wind = doc.pop("wind", {}) or {}
        try:
            if "drag_table" in wind:
                wind["drag_table"] = tuple(tuple(float(x) for x in row) for row in wind["drag_table"])
            kw["wind"] = WindLoadParams(**{k: (v if k == "drag_table" else float(v)) for k, v in wind.items()})
            cur = doc.pop("current", {}) or {}
            kw["current"] = CurrentLoad(float(cur.get("base", 1500.0)), float(cur.get("amplitude", 100.0)))
        except (TypeError, ValueError, GeometryError) as exc:
            raise ConfigError(str(exc)) from None
        if "damage_presets" in doc:
            kw["damage_presets"] = tuple((str(k), float(v)) for k, v in doc.pop("damage_presets").items())
        if "damage" in doc:
            d = doc.pop("damage")
            kw["damage"] = d if isinstance(d, str) else float(d)
        if "params" in doc:
            kw["params"] = parse_params(doc.pop("params"))
        for key, conv in (("points", int), ("seed", int), ("workers", int)):
            if key in doc and doc[key] is not None:
                kw[key] = conv(doc.pop(key))
            else:
                doc.pop(key, None)
        if "out" in doc:
            kw["out"] = doc.pop("out")
        if doc:
            raise ConfigError(f"unknown scenario keys: {sorted(doc)}")
        sc = cls(**kw)
        sc.validate()
        return sc

    @classmethod
    def load(cls, name_or_path, env: dict | None = None) -> "Scenario":
        doc = load_document(resolve_scenario_path(name_or_path))
        doc = apply_env(doc, os.environ if env is None else env)
        return cls.from_dict(doc)

    def validate(self):
        if not Path(self.weather).is_file():
            raise ConfigError(f"weather file not found: {self.weather}")
        if self.points < 1:
            raise ConfigError("points must be >= 1")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.a_sigma  # raises on unknown preset
        for p in self.params:
            if p not in RANDOM_PARAMETERS:
                raise ConfigError(f"unknown random parameter {p!r}")
        try:
            self.geometry()
        except GeometryError as exc:
            raise ConfigError(str(exc)) from None

    def with_overrides(self, **kw) -> "Scenario":
        sc = replace(self, **kw)
        sc.validate()
        return sc

    # -- derived objects --------------------------------------------------
    @property
    def a_sigma(self) -> float:
        if isinstance(self.damage, str):
            presets = dict(self.damage_presets)
            if self.damage not in presets:
                raise ConfigError(f"unknown damage level {self.damage!r}; presets: {sorted(presets)}")
            return float(presets[self.damage])
        return float(self.damage)

    def geometry(self, a_sigma: float | None = None) -> CableGeometry:
        return CableGeometry(self.length, self.diameter, self.a_sigma if a_sigma is None else a_sigma)

    def weather_series(self) -> WeatherSeries:
        try:
            return ingest_weather_csv(self.weather, self.name)
        except WeatherDataError as exc:
            raise ConfigError(str(exc)) from None

    def nominal_values(self) -> dict:
        """Mean values of every random parameter."""
        load = LoadingModel.from_weather(self.weather_series(), self.current)
        m = self.material
        return {"A_sigma": self.a_sigma, "gamma": m.gamma, "g_c": m.g_c, "a": m.aging,
                "theta_b": load.temp_k.a0 - KELVIN, "w_b": load.wind_ft.a0,
                "I_b": self.current.base, "I_a": self.current.amplitude}

    def build_model(self, overrides: dict | None = None, **sim) -> LineModel:
        """Deterministic model, optionally with random-parameter values
        substituted (keys from RANDOM_PARAMETERS) and simulation fields replaced."""
        ov = dict(overrides or {})
        bad = set(ov) - set(RANDOM_PARAMETERS)
        if bad:
            raise ConfigError(f"unknown override(s) {sorted(bad)}")
        mat = self.material
        mat_kw = {k2: ov[k1] for k1, k2 in (("gamma", "gamma"), ("g_c", "g_c"), ("a", "aging")) if k1 in ov}
        if mat_kw:
            mat = replace(mat, **mat_kw)
        geom = self.geometry(ov.get("A_sigma"))
        current = CurrentLoad(ov.get("I_b", self.current.base), ov.get("I_a", self.current.amplitude))
        load = LoadingModel.from_weather(self.weather_series(), current)
        if "theta_b" in ov:
            # base temperature is the channel mean in degrees Celsius
            load = replace(load, temp_k=load.temp_k.shifted_mean(ov["theta_b"] + KELVIN - load.temp_k.a0))
        if "w_b" in ov:
            load = replace(load, wind_ft=load.wind_ft.scaled_mean(ov["w_b"] / load.wind_ft.a0))
        theta_ref = mat.theta0 if self.sag.theta_ref is None else self.sag.theta_ref
        sag = SagParams.from_strength(self.sag.ultimate_strength, mat.rho, geom,
                                      fraction=self.sag.pretension_fraction,
                                      alpha_l=self.sag.alpha_l, theta_ref=theta_ref)
        cfg = replace(self.simulation, **sim) if sim else self.simulation
        return LineModel(geom, mat, sag, self.wind, load, cfg)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["wind"]["drag_table"] = [list(r) for r in self.wind.drag_table]
        d["damage_presets"] = dict(self.damage_presets)
        d["params"] = list(self.params)
        d["current"] = {"base": self.current.base, "amplitude": self.current.amplitude}
        d["a_sigma_resolved"] = self.a_sigma
        return d


def _simulation(d: dict) -> SimulationConfig:
    d = _checked(d, SimulationConfig)
    ints = {"n_steps", "steps_per_year", "n_elements", "snapshot_every"}
    return SimulationConfig(**{k: (int(v) if k in ints else float(v)) for k, v in d.items()})


def parse_params(value) -> tuple:
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    out = tuple(str(v) for v in value)
    for p in out:
        if p not in RANDOM_PARAMETERS:
            raise ConfigError(f"unknown random parameter {p!r}; choose from {RANDOM_PARAMETERS}")
    if len(out) != len(set(out)):
        raise ConfigError("duplicate random parameter")
    return out


ENV_KEYS = {"POINTS": "points", "SEED": "seed", "WORKERS": "workers", "PARAMS": "params",
            "OUT": "out", "DAMAGE": "damage"}


def apply_env(doc: dict, env) -> dict:
    """``TLINE_POINTS`` etc. override the corresponding top-level keys."""
    doc = dict(doc)
    for suffix, key in ENV_KEYS.items():
        val = env.get(ENV_PREFIX + suffix)
        if val is None or val == "":
            continue
        if key == "damage":
            try:
                doc[key] = float(val)
            except ValueError:
                doc[key] = val
        else:
            doc[key] = val
    return doc
