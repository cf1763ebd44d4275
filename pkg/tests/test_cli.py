from __future__ import annotations

import json

import numpy as np
import pytest

from main import EXIT_NUMERICAL, EXIT_OK, EXIT_OUTSIDE, EXIT_USAGE, main
from src import verify
from src.criteria import FINITE_TIME
from src.eos import GasParams
from src.verify import IdentityCheck

SMALL = ["--set", "grid.cells=64", "--set", "grid.x_min=-5", "--set", "grid.x_max=5"]


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("RELBLOW_OUT", raising=False)
    monkeypatch.delenv("RELBLOW_WORKERS", raising=False)


def _result(out) -> dict:
    (run_dir,) = [p for p in out.iterdir() if p.is_dir() and p.name != "logs"]
    return json.loads((run_dir / "result.json").read_text())


@pytest.mark.parametrize(
    "argv",
    [
        ["explode"],
        ["criteria", "--set", "nokey"],
        ["criteria", "--config", "no-such-preset"],
        ["criteria", "--set", "grid.cells=2"],
        ["criteria", "--seed", "one"],
    ],
)
def test_usage_and_config_errors(argv) -> None:
    assert main(argv) == EXIT_USAGE


def test_criteria_run_writes_artifacts(tmp_path) -> None:
    out = tmp_path / "out"
    argv = ["criteria", "--out", str(out), *SMALL, "--set", 'initial.u={"family": "tanh-ramp", "amplitude": -0.1}']
    assert main(argv) == EXIT_OK
    result = _result(out)
    assert result["status"] == "ok"
    assert result["verdict"] == FINITE_TIME
    run_dir = next(p for p in out.iterdir() if p.name.startswith("criteria-"))
    assert (run_dir / "labels.csv").exists()
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert "labels.csv" in manifest["files"]
    assert manifest["config"]["grid"]["cells"] == 64
    assert any((out / "logs").iterdir())


def test_sonic_data_exit_outside_theory(tmp_path) -> None:
    out = tmp_path / "out"
    assert main(["criteria", "--out", str(out), *SMALL, "--set", "initial.rho.base=0.6"]) == EXIT_OUTSIDE
    assert _result(out)["status"] == "outside-theory"


def test_thresholds_need_the_full_model(tmp_path) -> None:
    assert main(["thresholds", "--out", str(tmp_path / "out"), *SMALL]) == EXIT_USAGE


def test_failed_suite_exits_numerical(tmp_path, monkeypatch) -> None:
    def never(params: GasParams, rng: np.random.Generator, n: int) -> IdentityCheck:
        return IdentityCheck("never", "always fails", 1, 1.0, 0.0, False)

    monkeypatch.setitem(verify.IDENTITY_CHECKS, "never", never)
    out = tmp_path / "out"
    assert main(["verify-identities", "--out", str(out), "--set", 'verify.only=["never"]']) == EXIT_NUMERICAL
    result = _result(out)
    assert result["status"] == "failed-suite"
    assert result["failed"] == ["never"]
