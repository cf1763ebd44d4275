"""Run configuration: pydantic models, TOML presets and override merging.

Resolution order, later wins: model defaults, environment (RELBLOW_OUT,
RELBLOW_WORKERS), the TOML file or preset, ``--set key=value`` overrides,
then the dedicated ``--out`` and ``--seed`` flags.
"""
import hashlib
import json
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .eos import GasParams
from .errors import ConfigError
from .profiles import FieldProfile

PRESETS_DIR = Path(__file__).parent / "presets"
MODES = ("simulate", "criteria", "thresholds", "verify-identities", "verify-dynamics", "sweep")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Section):
    x_min: float = -10.0
    x_max: float = 10.0
    cells: int = Field(512, ge=8)
    boundary: Literal["periodic", "outflow"] = "outflow"

    @model_validator(mode="after")
    def _ordered(self) -> "GridConfig":
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        return self

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"


class TimeConfig(_Section):
    t_end: float = Field(1.0, gt=0.0)
    cfl: float = Field(0.4, gt=0.0, le=1.0)
    output_cadence: Optional[float] = Field(None, gt=0.0, description="Snapshot spacing; defaults to t_end/200")
    max_steps: int = Field(1_000_000, ge=1)

    def cadence(self) -> float:
        return self.output_cadence or self.t_end / 200.0


class InitialConfig(_Section):
    source: Literal["profile", "csv"] = "profile"
    csv_path: Optional[str] = None
    rho: FieldProfile = FieldProfile(family="constant", base=0.1)
    u: FieldProfile = FieldProfile()
    S: FieldProfile = FieldProfile()
    scale: float = Field(1.0, ge=0.0, description="Multiplies the velocity amplitude")
    calibrate: bool = Field(False, description="Bisect the scale so the data cross the strong-compression threshold")
    calibration_margin: float = Field(1.25, ge=1.0)
    calibration_s_max: Optional[float] = Field(None, gt=0.0, description="Defaults to scale with |u| reaching c/2")

    @model_validator(mode="after")
    def _csv_needs_path(self) -> "InitialConfig":
        if self.source == "csv" and not self.csv_path:
            raise ValueError("source = 'csv' needs csv_path")
        return self


class MonitorConfig(_Section):
    growth_factor: float = Field(100.0, gt=1.0)
    refine: bool = True
    band: Tuple[float, float] = (1.6, 2.4)
    trace_seeds: List[float] = Field(default_factory=list, description="Empty picks five evenly spaced seeds")
    trace_substeps: int = Field(4, ge=1)


class ThresholdConfig(_Section):
    grid_points: int = Field(33, ge=3)
    calibration_grid_points: int = Field(9, ge=3)
    refine: bool = True
    max_starts: int = Field(5, ge=1)
    gap_floor_fraction: float = Field(0.5, gt=0.0, le=1.0)
    entropy_samples: int = Field(257, ge=9)

    def options(self, calibration: bool = False) -> Dict[str, Any]:
        return {
            "grid_points": self.calibration_grid_points if calibration else self.grid_points,
            "gap_floor_fraction": self.gap_floor_fraction,
            "refine": False if calibration else self.refine,
            "max_starts": self.max_starts,
            "entropy_samples": self.entropy_samples,
        }


class VerifyConfig(_Section):
    n_samples: int = Field(100, ge=4)
    workers: Optional[int] = Field(None, ge=1)
    base_cells: int = Field(256, ge=16)
    levels: int = Field(3, ge=2)
    only: Optional[List[str]] = None


class SweepConfig(_Section):
    parameters: Dict[str, List[Any]] = Field(default_factory=dict, description="Dotted key -> values; runs the product")
    base_mode: Literal["simulate", "criteria", "thresholds"] = "criteria"
    workers: Optional[int] = Field(None, ge=1)


class OutputConfig(_Section):
    directory: str = "runs"
    formats: List[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])


class RunConfig(_Section):
    mode: Literal["simulate", "criteria", "thresholds", "verify-identities", "verify-dynamics", "sweep"] = "simulate"
    model: Literal["isentropic", "full"] = "isentropic"
    seed: int = 0
    rho_floor: float = Field(1e-12, gt=0.0)
    preset: Optional[str] = None
    gas: GasParams = GasParams()
    grid: GridConfig = GridConfig()
    time: TimeConfig = TimeConfig()
    initial: InitialConfig = InitialConfig()
    monitor: MonitorConfig = MonitorConfig()
    thresholds: ThresholdConfig = ThresholdConfig()
    verify: VerifyConfig = VerifyConfig()
    sweep: SweepConfig = SweepConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        if self.model == "full" and self.initial.source == "profile":
            sup_S = self.initial.S.sup_abs()
            if sup_S > self.gas.B:
                raise ValueError(f"initial.S reaches |S| = {sup_S:g} above gas.B = {self.gas.B:g}")
        if self.initial.calibrate and self.model != "full":
            raise ValueError("initial.calibrate applies to the full model only")
        if self.mode == "sweep" and not self.sweep.parameters:
            raise ValueError("sweep mode needs sweep.parameters")
        return self


def preset_names() -> List[str]:
    return sorted(p.stem for p in PRESETS_DIR.glob("*.toml"))


def read_config_file(path_or_preset: str) -> Dict[str, Any]:
    """Load a TOML file, or a bundled preset by name."""
    path = Path(path_or_preset)
    if not path.exists():
        candidate = PRESETS_DIR / f"{path_or_preset}.toml"
        if not candidate.exists():
            raise ConfigError(
                f"config {path_or_preset!r} is neither a file nor a preset",
                [f"known presets: {', '.join(preset_names())}"],
            )
        path = candidate
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    if path.parent == PRESETS_DIR:
        data.setdefault("preset", path.stem)
    return data


def parse_override(item: str) -> Tuple[str, Any]:
    """'a.b=value' -> ('a.b', value); the value is a JSON scalar or else a string."""
    key, sep, raw = item.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override {item!r} must look like key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_override(data: Dict[str, Any], dotted: str, value: Any) -> None:
    node = data
    parts = dotted.split(".")
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override {dotted!r}: {part!r} is not a table")
        node = child
    node[parts[-1]] = value


def env_defaults() -> Dict[str, Any]:
    data: Dict[str, Any] = {}
    out = os.getenv("RELBLOW_OUT")
    if out:
        apply_override(data, "output.directory", out)
    workers = os.getenv("RELBLOW_WORKERS")
    if workers:
        try:
            n = int(workers)
        except ValueError as e:
            raise ConfigError(f"RELBLOW_WORKERS={workers!r} is not an integer") from e
        apply_override(data, "verify.workers", n)
        apply_override(data, "sweep.workers", n)
    return data


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def validate_config(data: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig(**data)
    except ValidationError as e:
        fields = [f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()]
        raise ConfigError("invalid configuration", fields) from e


def resolve_config(
    mode: Optional[str] = None,
    config: Optional[str] = None,
    overrides: Sequence[str] = (),
    out: Optional[str] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    data = env_defaults()
    if config:
        data = _merge(data, read_config_file(config))
    for item in overrides:
        key, value = parse_override(item)
        apply_override(data, key, value)
    if mode is not None:
        data["mode"] = mode
    if out is not None:
        apply_override(data, "output.directory", out)
    if seed is not None:
        data["seed"] = seed
    return validate_config(data)


def config_hash(config: RunConfig) -> str:
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
