import json
import math
import os
import platform
from importlib import metadata
from typing import Any, Dict, List

import numpy as np

from .state import RunState

PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "langgraph")

COLUMN_DESCRIPTIONS: Dict[str, str] = {
    "t": "time",
    "x": "cell center or characteristic position",
    "rho": "mass-energy density",
    "u": "velocity",
    "S": "entropy",
    "w": "backward Riemann variable",
    "z": "forward Riemann variable",
    "dxw": "centered difference of w",
    "dxz": "centered difference of z",
    "max_dxz": "max |dx z| over the grid",
    "max_dxw": "max |dx w| over the grid",
    "min_rho": "min density over the grid",
    "total_D": "sum of D times dx",
    "total_m": "sum of m times dx",
    "max_abs_S": "max |S| over the grid",
    "xi": "weighted backward gradient e^{h1} dx w",
    "zeta": "weighted forward gradient e^{h2} dx z",
    "Y": "lower comparison quantity for the Riccati coefficient",
    "r": "weighted gradient along slow characteristics",
    "q": "weighted gradient along fast characteristics",
    "theta1": "dx S / n_t",
    "theta2": "(dxx S - theta1 dx n_t) / n_t^2",
    "cumulative_integral": "running time integral of the Riccati coefficient",
    "forward": "forward R/C/N label from the sign of dx z",
    "backward": "backward R/C/N label from the sign of dx w",
    "name": "check name",
    "relation": "relation under test",
    "samples": "number of evaluated residuals",
    "max_residual": "largest residual",
    "tolerance": "pass tolerance",
    "passed": "residual within tolerance",
    "run_dir": "per-run output directory",
    "family": "characteristic family",
    "seed": "starting position of the traced characteristic",
    "status": "run status",
    "verdict": "run verdict",
    "error": "error message of a failed run",
}


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def dump_json(path: str, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(payload), f, indent=2, sort_keys=True)
        f.write("\n")


def package_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "not installed"
    return versions


class ReportGenerator:
    """Writes result JSON, CSV tables and the run manifest into one directory per run."""

    def __init__(self, output_dir: str = "runs"):
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)

    def run_dir_for(self, state: RunState) -> str:
        config = state["config"]
        return os.path.join(self.output_dir, f"{config.mode}-{state['config_hash'][:10]}")

    def write_artifacts(self, state: RunState) -> RunState:
        config = state["config"]
        run_dir = self.run_dir_for(state)
        os.makedirs(run_dir, exist_ok=True)
        written: List[str] = []

        if "json" in config.output.formats:
            path = os.path.join(run_dir, "result.json")
            dump_json(path, {"status": state["status"], **state.get("result", {})})
            written.append(path)

        columns: Dict[str, Dict[str, str]] = {}
        if "csv" in config.output.formats:
            for name, frame in sorted((state.get("tables") or {}).items()):
                path = os.path.join(run_dir, f"{name}.csv")
                frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
                written.append(path)
                columns[f"{name}.csv"] = {c: COLUMN_DESCRIPTIONS.get(str(c), "") for c in frame.columns}

        table = (state.get("result") or {}).get("table")
        if table:
            path = os.path.join(run_dir, "table.txt")
            with open(path, "w", encoding="utf-8") as f:
                f.write(table + "\n")
            written.append(path)

        manifest = os.path.join(run_dir, "manifest.json")
        dump_json(manifest, {
            "config": config.model_dump(mode="json"),
            "config_hash": state["config_hash"],
            "calibration": state.get("calibration"),
            "versions": package_versions(),
            "files": sorted(os.path.basename(p) for p in written),
            "columns": columns,
        })
        written.append(manifest)

        state["artifacts"] = written
        state["run_dir"] = run_dir
        print(f"Report generated: {run_dir}")
        return state
