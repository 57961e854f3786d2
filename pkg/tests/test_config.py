import pytest

from ftismc_lab.config import (ConfigError, apply_overrides_raw,
                               default_config, load_config)


def test_defaults():
    cfg = default_config()
    assert cfg.controller == "ftismc_bsp"
    assert cfg.dt == 1e-4
    assert cfg.duration == 30.0
    assert cfg.robot.m1 == 1.5 and cfg.robot.m2 == 1.0
    assert cfg.admittance.kk == 100.0
    assert cfg.gains.pid.kp == 300.0
    assert cfg.gains.bsp.lambda3 == 50.0
    assert cfg.gains.comp.rho == 30.0
    assert cfg.gains.ns.k5 == cfg.gains.ft.k1


def test_validation():
    with pytest.raises(ConfigError):
        default_config(dt=0.0)
    with pytest.raises(ConfigError):
        default_config(controller="bogus")
    with pytest.raises(ConfigError):
        default_config(plant="hexapod")


def test_load_toml(tmp_path):
    path = tmp_path / "scenario.toml"
    path.write_text(
        '[robot]\nm2 = 1.25\n\n'
        '[controller]\nname = "ctc"\nkp = 150.0\n\n'
        '[force]\namplitude = [2.0, 0.5]\n\n'
        '[simulation]\nduration = 5.0\nzoh = true\n')
    cfg = load_config(path)
    assert cfg.robot.m2 == 1.25
    assert cfg.controller == "ctc"
    assert cfg.gains.ctc.kp == 150.0
    assert cfg.force.amplitude == (2.0, 0.5)
    assert cfg.duration == 5.0 and cfg.zoh is True


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('[robot]\nmass = 1.0\n')
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text('[rocket]\nm1 = 1.0\n')
    with pytest.raises(ConfigError):
        load_config(path)


def test_overrides():
    cfg = apply_overrides_raw({}, ["controller.name=pid",
                                   "simulation.dt=0.001",
                                   "robot.g=0.0"])
    assert cfg.controller == "pid"
    assert cfg.dt == 0.001
    assert cfg.robot.g == 0.0
    with pytest.raises(ConfigError):
        apply_overrides_raw({}, ["no-equals-sign"])
    with pytest.raises(ConfigError):
        apply_overrides_raw({}, ["simulation.warp=9"])


def test_override_beats_file(tmp_path):
    path = tmp_path / "scenario.toml"
    path.write_text('[simulation]\nduration = 5.0\n')
    cfg = load_config(path, ["simulation.duration=7.5"])
    assert cfg.duration == 7.5
