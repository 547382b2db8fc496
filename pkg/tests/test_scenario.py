import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coopraman.scenario import (ConfigError, SystemConfig, load_scenario, min_sensor_count,
                                place_sensors, prob_no_vessel, save_scenario)


def test_defaults_in_si_units(cfg):
    assert cfg.P_t == pytest.approx(0.01)
    assert cfg.G_t == pytest.approx(1000.0)
    assert cfg.N_f == 148 and len(cfg.shift_axis) == 149
    assert cfg.shift_axis[0] == 400.0 and cfg.shift_axis[-1] == 1880.0
    assert np.allclose(cfg.bin_width, 10.0)


def test_dbm_round_trip(tmp_path, cfg):
    path = tmp_path / "s.json"
    save_scenario(cfg, path)
    doc = json.loads(path.read_text())
    assert doc["P_t_dBm"] == pytest.approx(10.0)
    assert doc["G_r_dBi"] == pytest.approx(30.0)
    assert load_scenario(path) == cfg


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        SystemConfig.from_dict({"bogus": 1})


def test_linear_power_key_rejected_in_json():
    # the file format carries dBm only
    with pytest.raises(ConfigError):
        SystemConfig.from_dict({"P_t": 0.01})


@pytest.mark.parametrize("bad", [
    {"r_b": 6e-3},
    {"S_l": 4e-7},
    {"N_s": 3},                      # fewer sensors than groups
    {"K_groups": 0},
    {"p_prior": 1.0},
    {"u": 0.0},
    {"shift_axis": [400.0, 390.0]},
    {"N_f": 10},                     # edge count mismatch
    {"vessel_model": "other"},
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        SystemConfig.from_dict(bad)


def test_with_overrides_accepts_both_units(cfg):
    assert cfg.with_overrides(P_t_dBm=0.0).P_t == pytest.approx(1e-3)
    assert cfg.with_overrides(P_t=0.5).P_t == 0.5
    assert cfg.with_overrides(N_s=12).N_s == 12


# placement -------------------------------------------------------------------

def test_first_sensor_at_zero():
    layout = place_sensors(SystemConfig(N_s=1, N_f=8, K_groups=1, shift_axis=range(400, 490, 10)))
    assert layout.angles[0, 0] == 0.0


def test_two_sensor_second_band():
    cfg = SystemConfig(N_s=2, N_f=8, K_groups=1, shift_axis=range(400, 490, 10))
    a = place_sensors(cfg).angles[:, 1]
    assert np.allclose(a, [np.pi / 8, np.pi + np.pi / 8])


def test_three_sensors_uniform_spacing():
    cfg = SystemConfig(N_s=3, N_f=8, K_groups=1, shift_axis=range(400, 490, 10))
    a = np.sort(place_sensors(cfg).angles.ravel())
    assert a.size == 24
    assert np.allclose(np.diff(a), 2 * np.pi / 24)


@given(st.integers(1, 12), st.integers(1, 20))
def test_layout_invariants(N_s, N_f):
    cfg = SystemConfig(N_s=N_s, N_f=N_f, K_groups=1,
                       shift_axis=np.arange(N_f + 1) * 10.0 + 400.0)
    a = place_sensors(cfg).angles
    assert np.all((a >= 0) & (a < 2 * np.pi))
    assert np.all(np.diff(a, axis=1) > 0)
    # the angles fill every slot of a 2pi/(N_s N_f) grid exactly once, so a
    # rotation by one slot maps the set onto itself
    slots = a.ravel() / (2 * np.pi / (N_s * N_f))
    k = np.round(slots)
    assert np.allclose(slots, k, atol=1e-9)
    assert sorted(k.astype(int)) == list(range(N_s * N_f))


# vessel bound --------------------------------------------------------------------

def test_prob_no_vessel_value(cfg):
    # mean vessel count over 30 beams is 4.0932
    assert prob_no_vessel(cfg) == pytest.approx(math.exp(-4.093213397673), rel=1e-9)
    assert prob_no_vessel(cfg) == pytest.approx(0.0167, abs=5e-5)


def test_prob_no_vessel_zero_density(cfg):
    assert prob_no_vessel(replace(cfg, lambda_b=0.0)) == 1.0


def test_prob_no_vessel_squares_when_sensors_double(cfg):
    assert prob_no_vessel(cfg, 60) == pytest.approx(prob_no_vessel(cfg, 30) ** 2)


@pytest.mark.parametrize("tau,expected", [(0.1, 17), (0.01, 34)])
def test_min_sensor_count_values(cfg, tau, expected):
    assert min_sensor_count(cfg, tau) == expected


def test_min_sensor_count_near_one(cfg):
    # the bound itself goes to 0; one sensor already meets any tau close to 1
    assert min_sensor_count(cfg, 1 - 1e-12) == 1
    assert -2 * math.log(1 - 1e-12) / (cfg.lambda_b * cfg.h_c ** 2 * cfg.tan_half) < 1e-8


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.1, 2.0])
def test_min_sensor_count_rejects(cfg, tau):
    with pytest.raises(ValueError):
        min_sensor_count(cfg, tau)


@given(st.floats(1e-6, 0.999))
def test_min_sensor_count_is_smallest(tau):
    cfg = SystemConfig()
    n = min_sensor_count(cfg, tau)
    assert prob_no_vessel(cfg, n) <= tau
    assert n == 0 or prob_no_vessel(cfg, n - 1) > tau


@given(st.sampled_from(["lambda_b", "N_s", "h_c", "alpha"]), st.floats(1.05, 1.8))
def test_prob_no_vessel_decreasing(name, factor):
    cfg = SystemConfig(N_s=10, h_c=1e-3)
    v = getattr(cfg, name) * factor
    bigger = replace(cfg, **{name: round(v) if name == "N_s" else v})
    if bigger.N_s == cfg.N_s and name == "N_s":
        return
    assert prob_no_vessel(bigger) < prob_no_vessel(cfg)
