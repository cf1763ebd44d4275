"""Cartesian parameter sweeps over a base configuration."""
import hashlib
import itertools
import json
import os
from multiprocessing import Pool
from typing import Any, Dict, List, Tuple

import pandas as pd

from .config import RunConfig, apply_override, validate_config
from .errors import RelblowError


def build_configs(config: RunConfig) -> List[Tuple[Dict[str, Any], Dict[str, Any]]]:
    """One (parameters, config dict) pair per point of the product, in a stable order."""
    keys = sorted(config.sweep.parameters)
    base = config.model_dump(mode="json")
    base["mode"] = config.sweep.base_mode
    base["gas"].pop("Cv", None)
    base["sweep"] = {"parameters": {}, "base_mode": config.sweep.base_mode, "workers": None}
    jobs = []
    for values in itertools.product(*(config.sweep.parameters[k] for k in keys)):
        child = json.loads(json.dumps(base))
        point = dict(zip(keys, values))
        for key, value in point.items():
            apply_override(child, key, value)
        jobs.append((point, child))
    return jobs


def make_outdir(base: str, cfg: Dict[str, Any]) -> str:
    """Unique directory name for a given config."""
    h = hashlib.sha1(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:10]
    return os.path.join(base, h)


def worker(job: Tuple[str, Dict[str, Any], Dict[str, Any]]) -> Dict[str, Any]:
    """Top-level worker function for multiprocessing."""
    from .graph import RunPipeline

    base_outdir, point, cfg = job
    outdir = make_outdir(base_outdir, cfg)
    row: Dict[str, Any] = {"run_dir": outdir, **point}
    cfg = dict(cfg, output={**cfg.get("output", {}), "directory": outdir})
    print(f"→ Running {outdir}")
    try:
        state = RunPipeline(validate_config(cfg)).run()
    except RelblowError as e:
        row.update(status="error", verdict=None, error=f"{type(e).__name__}: {e}")
        print(f"✗ Failed {outdir}")
        return row
    row.update(status=state["status"], verdict=state["result"].get("verdict"), error="")
    print(f"✓ Done   {outdir}")
    return row


def run_sweep(config: RunConfig, base_outdir: str) -> pd.DataFrame:
    jobs = [(base_outdir, point, cfg) for point, cfg in build_configs(config)]
    print(f"Total runs: {len(jobs)}")
    os.makedirs(base_outdir, exist_ok=True)
    workers = config.sweep.workers or 1
    if workers > 1:
        with Pool(workers) as P:
            rows = P.map(worker, jobs)
    else:
        rows = [worker(job) for job in jobs]
    if not rows:
        return pd.DataFrame(columns=["run_dir", "status", "verdict", "error"])
    return pd.DataFrame(rows).sort_values("run_dir").reset_index(drop=True)
