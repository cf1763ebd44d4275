import numpy as np

from .errors import ConfigError, InvalidInputError
from .state import RunState

SIMULATION_MODES = ("simulate", "criteria", "thresholds")


class Validator:
    """Checks prepared initial data before any computation runs."""

    def validate_run(self, state: RunState) -> RunState:
        """Reject data the solver or the criteria cannot accept."""
        config = state["config"]
        if config.mode == "thresholds" and config.model != "full":
            raise ConfigError("invalid configuration", ["mode: thresholds needs model = 'full'"])
        data = state.get("data")
        if config.mode not in SIMULATION_MODES or data is None:
            return state

        params = state["params"]
        problems = []
        if not np.all(np.isfinite(data.rho)) or not np.all(np.isfinite(data.u)) or not np.all(np.isfinite(data.S)):
            problems.append("initial: non-finite samples")
        if np.any(data.rho < 0.0):
            problems.append("initial.rho: negative density")
        elif config.mode == "simulate" and np.any(data.rho < config.rho_floor):
            # criteria tolerate vacuum points; the solver does not
            problems.append(f"initial.rho: density below rho_floor = {config.rho_floor:g}")
        if np.any(np.abs(data.u) >= params.c):
            problems.append(f"initial.u: |u| reaches c = {params.c:g}")
        if config.model == "full" and np.any(np.abs(data.S) > params.B):
            problems.append(f"initial.S: |S| exceeds gas.B = {params.B:g}")
        if problems:
            raise ConfigError("initial data are not admissible", problems)
        if data.cells < 8:
            raise InvalidInputError("at least eight cells are needed")
        print("Initial data validated")
        return state

    def should_refine(self, state: RunState) -> bool:
        """Re-run at doubled resolution once when a blow-up candidate has no refinement signature yet."""
        config = state["config"]
        observation = state.get("observation") or {}
        return (
            config.mode == "simulate"
            and config.monitor.refine
            and bool(observation.get("candidate"))
            and state.get("refined") is None
            and state.get("refine_count", 0) < 1
        )
