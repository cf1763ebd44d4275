from __future__ import annotations

import pytest

from src.config import (
    RunConfig,
    apply_override,
    config_hash,
    env_defaults,
    parse_override,
    preset_names,
    read_config_file,
    resolve_config,
)
from src.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("RELBLOW_OUT", raising=False)
    monkeypatch.delenv("RELBLOW_WORKERS", raising=False)


@pytest.mark.parametrize(
    "item,expected",
    [
        ("gas.gamma=1.5", ("gas.gamma", 1.5)),
        ("model=full", ("model", "full")),
        ("grid.cells = 64", ("grid.cells", 64)),
        ("monitor.refine=false", ("monitor.refine", False)),
        ('verify.only=["jacobian"]', ("verify.only", ["jacobian"])),
    ],
)
def test_parse_override(item: str, expected) -> None:
    assert parse_override(item) == expected


@pytest.mark.parametrize("item", ["model", "=3", " =full"])
def test_parse_override_rejects_malformed(item: str) -> None:
    with pytest.raises(ConfigError):
        parse_override(item)


def test_apply_override_nests_tables() -> None:
    data = {"grid": {"cells": 8}}
    apply_override(data, "grid.boundary", "periodic")
    apply_override(data, "initial.u.amplitude", 0.1)
    assert data == {"grid": {"cells": 8, "boundary": "periodic"}, "initial": {"u": {"amplitude": 0.1}}}
    with pytest.raises(ConfigError):
        apply_override(data, "grid.cells.value", 1)


def test_resolution_order(tmp_path) -> None:
    path = tmp_path / "run.toml"
    path.write_text('model = "full"\nseed = 2\n[gas]\nB = 0.5\n[output]\ndirectory = "from-file"\n')
    config = resolve_config("criteria", str(path), ["gas.B=0.25", "seed=4"], out=str(tmp_path / "out"), seed=9)
    assert config.mode == "criteria"
    assert config.model == "full"
    assert config.gas.B == 0.25
    assert config.seed == 9
    assert config.output.directory == str(tmp_path / "out")


def test_environment_defaults(monkeypatch) -> None:
    monkeypatch.setenv("RELBLOW_OUT", "/tmp/relblow-env")
    monkeypatch.setenv("RELBLOW_WORKERS", "3")
    assert env_defaults() == {
        "output": {"directory": "/tmp/relblow-env"},
        "verify": {"workers": 3},
        "sweep": {"workers": 3},
    }
    config = resolve_config("verify-identities")
    assert config.verify.workers == 3
    assert resolve_config("verify-identities", out="elsewhere").output.directory == "elsewhere"

    monkeypatch.setenv("RELBLOW_WORKERS", "many")
    with pytest.raises(ConfigError):
        env_defaults()


@pytest.mark.parametrize("name", preset_names())
def test_presets_validate(name: str) -> None:
    config = resolve_config(config=name)
    assert config.preset == name
    assert isinstance(config, RunConfig)


def test_known_presets() -> None:
    assert {"iso-compression", "iso-rarefaction", "noniso-strong", "noniso-weak"} <= set(preset_names())


@pytest.mark.parametrize(
    "overrides,field",
    [
        (["grid.nope=1"], "grid.nope"),
        (["grid.x_min=1", "grid.x_max=0"], "grid"),
        (["time.cfl=1.5"], "time.cfl"),
        (["initial.calibrate=true"], "<root>"),
        (["model=full", "gas.B=0.1", "initial.S.base=0.5"], "<root>"),
        (["initial.source=csv"], "initial"),
        (["gas.gamma=1.0"], "gas.gamma"),
    ],
)
def test_invalid_configs_name_the_field(overrides, field: str) -> None:
    with pytest.raises(ConfigError) as err:
        resolve_config("criteria", overrides=overrides)
    assert any(f.startswith(field) for f in err.value.fields)


def test_sweep_needs_parameters() -> None:
    with pytest.raises(ConfigError):
        resolve_config("sweep")
    config = resolve_config("sweep", overrides=['sweep.parameters={"gas.gamma": [1.5, 2.0]}'])
    assert config.sweep.parameters == {"gas.gamma": [1.5, 2.0]}


def test_missing_and_broken_files(tmp_path) -> None:
    with pytest.raises(ConfigError) as err:
        read_config_file(str(tmp_path / "absent.toml"))
    assert "known presets" in err.value.fields[0]
    broken = tmp_path / "broken.toml"
    broken.write_text("model = \n")
    with pytest.raises(ConfigError):
        read_config_file(str(broken))


def test_config_hash_is_stable() -> None:
    a = resolve_config("criteria", overrides=["grid.cells=64"])
    b = resolve_config("criteria", overrides=["grid.cells=64"])
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 16
    assert config_hash(a) != config_hash(resolve_config("criteria", overrides=["grid.cells=128"]))
