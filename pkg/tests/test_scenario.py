import json

import numpy as np
import pytest

from tline.loading import ingest_weather_csv
from tline.scenario import (DAMAGE_LEVELS, ConfigError, Scenario, apply_env, data_dir, load_document,
                            parse_params)

from conftest import STATES

TABLE3 = data_dir() / "table3.yaml"


@pytest.mark.parametrize("state", STATES)
def test_presets_load(state):
    sc = Scenario.load(state, env={})
    assert sc.name == state
    assert sc.material.young == 6.9e10 and sc.material.sigma_e0 == 3.77e7
    assert [sc.with_overrides(damage=d).a_sigma for d in DAMAGE_LEVELS] == [10.0, 3.5, 1.7]


def test_nominal_values(texas):
    ws = ingest_weather_csv(texas.weather)
    nom = texas.nominal_values()
    assert nom["theta_b"] == pytest.approx(np.mean(ws.ambient_temp) - 273.15)
    assert nom["w_b"] == pytest.approx(np.mean(ws.wind))
    assert nom["I_b"] == 1500.0 and nom["I_a"] == 100.0
    assert nom["g_c"] == 1e4 and nom["a"] == 1e-10


def test_build_model_overrides(texas):
    base = texas.build_model()
    m = texas.build_model({"theta_b": 25.0, "w_b": 11.0, "I_b": 1600.0, "g_c": 9000.0, "a": 2e-10,
                           "gamma": 0.03, "A_sigma": 4.0, "I_a": 0.0})
    assert m.loading.temp_k.a0 == pytest.approx(298.15)
    assert m.loading.temp_k.a == base.loading.temp_k.a
    assert m.loading.wind_ft.a0 == pytest.approx(11.0)
    assert m.loading.current.base == 1600.0 and m.loading.current.amplitude == 0.0
    assert (m.material.g_c, m.material.aging, m.material.gamma) == (9000.0, 2e-10, 0.03)
    assert m.geometry.a_sigma == 4.0
    # wind harmonics scale with the mean
    ratio = 11.0 / base.loading.wind_ft.a0
    np.testing.assert_allclose(m.loading.wind_ft.a, base.loading.wind_ft.a)
    assert m.loading.wind_ft.a0 == pytest.approx(base.loading.wind_ft.a0 * ratio)
    with pytest.raises(ConfigError):
        texas.build_model({"bogus": 1.0})


def test_simulation_overrides(texas):
    m = texas.build_model(n_elements=50, n_steps=10)
    assert m.config.n_elements == 50 and m.config.n_steps == 10
    assert m.sag.h0 == pytest.approx(37000.0)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_include_and_relative_weather(tmp_path):
    (tmp_path / "w").mkdir()
    (tmp_path / "w" / "mine.csv").write_text((data_dir() / "florida.csv").read_text())
    p = _write(tmp_path, "s.yaml", f"include: {TABLE3}\nname: mine\nweather: w/mine.csv\n"
                                   "material:\n  gamma: 0.03\ndamage: 2.5\n")
    sc = Scenario.load(p, env={})
    assert sc.material.gamma == 0.03
    assert sc.material.g_c == 1e4         # from the included block
    assert sc.a_sigma == 2.5
    assert sc.weather.endswith("mine.csv")


@pytest.mark.parametrize("text,match", [
    ("name: x\n", "missing required key"),
    ("weather: nowhere.csv\n", "weather file not found"),
    ("bogus: 1\n", "unknown scenario keys"),
    ("material:\n  stiffness: 1\n", "unknown MaterialParams key"),
    ("damage: catastrophic\n", "unknown damage level"),
    ("params: [g_c, zeta]\n", "unknown random parameter"),
    ("damage: 0.3\n", "damage exceeds section"),
    ("material:\n  gamma: -1\n", "positive"),
    ("- a\n- b\n", "mapping"),
])
def test_config_errors(tmp_path, text, match):
    body = text if text.startswith("- ") else f"include: {TABLE3}\nweather: {data_dir() / 'texas.csv'}\n" + text
    if text.startswith("name:"):
        body = text
    with pytest.raises(ConfigError, match=match):
        Scenario.load(_write(tmp_path, "bad.yaml", body), env={})


def test_include_cycle(tmp_path):
    _write(tmp_path, "a.yaml", "include: b.yaml\n")
    b = _write(tmp_path, "b.yaml", "include: a.yaml\n")
    with pytest.raises(ConfigError, match="cycle"):
        load_document(b)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        Scenario.load("atlantis", env={})


def test_env_overrides():
    env = {"TLINE_POINTS": "3", "TLINE_PARAMS": "I_b,g_c", "TLINE_DAMAGE": "2.5", "TLINE_SEED": "9",
           "TLINE_WORKERS": "2", "TLINE_OUT": "/tmp/x"}
    sc = Scenario.load("texas", env=env)
    assert (sc.points, sc.params, sc.a_sigma, sc.seed, sc.workers, sc.out) == (3, ("I_b", "g_c"), 2.5, 9, 2, "/tmp/x")
    assert Scenario.load("texas", env={"TLINE_DAMAGE": "severe"}).a_sigma == 1.7
    assert apply_env({"points": 5}, {}) == {"points": 5}


def test_parse_params():
    assert parse_params("g_c, a ,I_b") == ("g_c", "a", "I_b")
    assert parse_params(["theta_b"]) == ("theta_b",)
    with pytest.raises(ConfigError):
        parse_params("g_c,g_c")


def test_config_echo_is_json(texas):
    d = json.loads(json.dumps(texas.to_dict()))
    assert d["a_sigma_resolved"] == 10.0
    assert d["material"]["young"] == 6.9e10
