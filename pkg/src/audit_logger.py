import hashlib
import json
import os
from datetime import datetime
from typing import Any, Dict, Optional

from .state import RunState


class AuditLogger:
    """Appends one JSON line per graph node to <out>/logs/audit_YYYYMMDD.jsonl."""

    def __init__(self, logs_dir: str = "logs"):
        self.logs_dir = logs_dir
        os.makedirs(logs_dir, exist_ok=True)
        self.log_file = os.path.join(logs_dir, f"audit_{datetime.now().strftime('%Y%m%d')}.jsonl")

    def log_node_execution(self, node_name: str, state: RunState, status: str, error: Optional[str] = None) -> None:
        """Log the execution of a run-graph node."""
        config = state["config"]
        log_entry = {
            "timestamp": datetime.now().isoformat(),
            "node": node_name,
            "status": status,
            "mode": config.mode,
            "model": config.model,
            "input_hash": state.get("config_hash", ""),
            "output_hash": self._create_hash(json.dumps(state.get("result") or {}, sort_keys=True, default=str)),
            "run_status": state.get("status", ""),
            "refine_count": state.get("refine_count", 0),
        }
        if error:
            log_entry["error"] = error

        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write(json.dumps(log_entry) + "\n")

        print(f"Audit log: {node_name} - {status}")

    def _create_hash(self, data: str) -> str:
        """SHA256 prefix used as an integrity tag."""
        return hashlib.sha256(data.encode("utf-8")).hexdigest()[:16]

    def get_pipeline_summary(self, state: RunState) -> Dict[str, Any]:
        config = state["config"]
        result = state.get("result") or {}
        return {
            "mode": config.mode,
            "model": config.model,
            "status": state.get("status", ""),
            "verdict": result.get("verdict"),
            "refinements": state.get("refine_count", 0),
            "artifacts": len(state.get("artifacts") or []),
            "run_dir": state.get("run_dir"),
        }
