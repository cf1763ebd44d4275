from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from langgraph.graph import END, StateGraph

from .audit_logger import AuditLogger
from .characteristics import FAMILIES, trace_many
from .config import RunConfig, config_hash
from .criteria import (
    CalibrationResult,
    blowup_window_iso,
    calibrate_compression_scale,
    classify,
    noniso_thresholds,
)
from .errors import ConfigError
from .eos import GasParams
from .profiles import InitialData, cell_centers, derive_initial, from_profiles, load_csv
from .report_generator import ReportGenerator
from .solver import RunHistory, conservation_drift, monitor_blowup, n_tilde_residual, solve
from .state import STATUS_FAILED_SUITE, STATUS_NUMERICAL, STATUS_OK, STATUS_OUTSIDE, RunState
from .thresholds import psi_Psi_K
from .validator import Validator
from .verify import run_dynamics_suite, run_identity_suite

SNAPSHOTS_WRITTEN = 11
DEFAULT_SEEDS = 5


def build_initial(config: RunConfig, cells: Optional[int] = None, scale: Optional[float] = None) -> InitialData:
    """Initial data from the profile families or the CSV file, optionally at another resolution."""
    grid, initial = config.grid, config.initial
    if initial.source == "csv":
        data = load_csv(initial.csv_path, grid.periodic)
        if cells is None or cells == data.cells:
            return data
        half = 0.5 * data.dx
        return data.resample(cell_centers(float(data.x[0] - half), float(data.x[-1] + half), cells))
    return from_profiles(
        initial.rho, initial.u, initial.S, grid.x_min, grid.x_max, cells or grid.cells,
        grid.periodic, initial.scale if scale is None else scale,
    )


def calibrate_initial(config: RunConfig, params: GasParams) -> CalibrationResult:
    """Scale the velocity profile until min r0 falls below -N1 (or min q0 below -N2)."""
    amplitude = abs(config.initial.u.amplitude)
    if config.initial.source != "profile" or amplitude == 0.0:
        raise ConfigError("invalid configuration", ["initial.calibrate: needs a velocity profile with non-zero amplitude"])
    s_max = config.initial.calibration_s_max or 0.5 * params.c / amplitude
    return calibrate_compression_scale(
        lambda s: build_initial(config, scale=s),
        params,
        s_max,
        margin=config.initial.calibration_margin,
        rho_floor=config.rho_floor,
        **config.thresholds.options(calibration=True),
    )


def trace_seeds(config: RunConfig, data: InitialData) -> List[float]:
    if config.monitor.trace_seeds:
        return list(config.monitor.trace_seeds)
    lo, hi = float(data.x[0]), float(data.x[-1])
    return list(np.linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), DEFAULT_SEEDS))


def history_tables(history: RunHistory) -> Dict[str, pd.DataFrame]:
    monitor = pd.DataFrame(history.monitor)
    picks = np.unique(np.linspace(0, len(history.snapshots) - 1, SNAPSHOTS_WRITTEN).round().astype(int))
    frames = []
    for i in picks:
        s = history.snapshots[i]
        frames.append(pd.DataFrame({
            "t": s.t, "x": s.x, "rho": s.rho, "u": s.u, "S": s.S, "w": s.w, "z": s.z,
            "dxw": s.grads["dxw"], "dxz": s.grads["dxz"],
        }))
    return {"monitor": monitor, "snapshots": pd.concat(frames, ignore_index=True)}


def trace_table(history: RunHistory, seeds: List[float], substeps: int) -> Tuple[pd.DataFrame, int]:
    """All traced characteristics in one long table; returns it with the truncated count."""
    if len(history.snapshots) < 2:
        return pd.DataFrame(), 0
    traces = trace_many(history, seeds, families=FAMILIES[history.model], substeps=substeps)
    frames = []
    for seed_index, trace in enumerate(traces):
        frame = trace.as_frame()
        frame.insert(0, "seed", seeds[seed_index % len(seeds)])
        frame.insert(0, "family", trace.family)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True), sum(t.truncated for t in traces)


class RunPipeline:
    """Run orchestrator using LangGraph."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.validator = Validator()
        self.report_generator = ReportGenerator(config.output.directory)
        self.audit_logger = AuditLogger(f"{config.output.directory}/logs")
        self.graph = self._build_graph()

    def _build_graph(self) -> StateGraph:
        workflow = StateGraph(RunState)

        workflow.add_node("prepare", self._prepare_node)
        workflow.add_node("execute", self._execute_node)
        workflow.add_node("monitor", self._monitor_node)
        workflow.add_node("refine", self._refine_node)
        workflow.add_node("write_artifacts", self._write_artifacts_node)
        workflow.add_node("log_completion", self._log_completion_node)

        workflow.set_entry_point("prepare")

        workflow.add_edge("prepare", "execute")
        workflow.add_edge("execute", "monitor")
        workflow.add_edge("refine", "monitor")
        workflow.add_edge("write_artifacts", "log_completion")
        workflow.add_edge("log_completion", END)

        workflow.add_conditional_edges(
            "monitor",
            self._should_refine_or_continue,
            {
                "refine": "refine",
                "continue": "write_artifacts",
            },
        )

        return workflow.compile()

    def _node(self, name: str, fn, state: RunState) -> RunState:
        try:
            new_state = fn(state)
            self.audit_logger.log_node_execution(name, new_state, "success")
            return new_state
        except Exception as e:
            self.audit_logger.log_node_execution(name, state, "error", f"{type(e).__name__}: {e}")
            raise

    def _prepare_node(self, state: RunState) -> RunState:
        """Node for building parameters and initial data."""
        return self._node("prepare", self._prepare, state)

    def _execute_node(self, state: RunState) -> RunState:
        """Node for the mode's main computation."""
        return self._node("execute", self._execute, state)

    def _monitor_node(self, state: RunState) -> RunState:
        """Node for the blow-up declaration."""
        return self._node("monitor", self._monitor, state)

    def _refine_node(self, state: RunState) -> RunState:
        """Node for the doubled-resolution rerun."""
        return self._node("refine", self._refine, state)

    def _write_artifacts_node(self, state: RunState) -> RunState:
        """Node for writing result files."""
        return self._node("write_artifacts", self.report_generator.write_artifacts, state)

    def _log_completion_node(self, state: RunState) -> RunState:
        """Node for logging completion."""
        try:
            summary = self.audit_logger.get_pipeline_summary(state)
            print(f"\nRun Summary: {summary}")
            self.audit_logger.log_node_execution("run_complete", state, "success")
            return state
        except Exception as e:
            self.audit_logger.log_node_execution("run_complete", state, "error", str(e))
            raise

    def _should_refine_or_continue(self, state: RunState) -> str:
        if self.validator.should_refine(state):
            return "refine"
        return "continue"

    def _prepare(self, state: RunState) -> RunState:
        config = state["config"]
        state["params"] = config.gas
        if config.mode in ("simulate", "criteria", "thresholds"):
            if config.initial.calibrate:
                calibration = calibrate_initial(config, config.gas)
                state["calibration"] = calibration.as_dict()
                state["data"] = build_initial(config, scale=calibration.scale)
                print(f"Calibrated velocity scale: {calibration.scale:.6g} (flip at {calibration.flip:.6g})")
            else:
                state["data"] = build_initial(config)
        return self.validator.validate_run(state)

    def _execute(self, state: RunState) -> RunState:
        mode = state["config"].mode
        if mode == "simulate":
            return self._simulate(state)
        if mode == "criteria":
            return self._criteria(state)
        if mode == "thresholds":
            return self._thresholds(state)
        if mode in ("verify-identities", "verify-dynamics"):
            return self._verify(state)
        return self._sweep(state)

    def _simulate(self, state: RunState) -> RunState:
        config, params, data = state["config"], state["params"], state["data"]
        history = solve(
            data, params, config.model, config.time.t_end, cfl=config.time.cfl,
            output_cadence=config.time.cadence(), max_steps=config.time.max_steps,
            stop_growth=config.monitor.growth_factor,
        )
        state["history"] = history
        result: Dict[str, Any] = {
            "model": config.model,
            "stop_reason": history.stop_reason,
            "steps": history.steps,
            "t_final": history.final.t,
            "failure": history.failure,
            "conservation_drift": conservation_drift(history),
            "n_tilde_residual": n_tilde_residual(history),
        }
        if config.model == "isentropic":
            result["predicted_window"] = blowup_window_iso(derive_initial(data, params, "isentropic", config.rho_floor), params)
        tables = history_tables(history)
        traces, truncated = trace_table(history, trace_seeds(config, data), config.monitor.trace_substeps)
        if not traces.empty:
            tables["traces"] = traces
        result["truncated_traces"] = truncated
        state["tables"] = tables
        state["result"] = result
        print(f"Simulation stopped at t = {history.final.t:.6g} ({history.stop_reason}, {history.steps} steps)")
        return state

    def _criteria(self, state: RunState) -> RunState:
        config = state["config"]
        report = classify(
            state["data"], state["params"], config.model, config.rho_floor,
            **(config.thresholds.options() if config.model == "full" else {}),
        )
        state["result"] = report.as_dict()
        state["tables"] = {"labels": report.labels_frame()}
        state["status"] = STATUS_OUTSIDE if report.outside_theory else STATUS_OK
        print(f"Criteria verdict: {report.verdict}")
        return state

    def _thresholds(self, state: RunState) -> RunState:
        config, params, data = state["config"], state["params"], state["data"]
        derived = derive_initial(data, params, "full", config.rho_floor)
        opts = config.thresholds.options()
        constants, report = noniso_thresholds(derived, params, periodic=data.periodic, **opts)
        bounds = psi_Psi_K(params, samples=opts["entropy_samples"])
        result: Dict[str, Any] = {
            "constants": constants.as_dict(),
            "entropy_bounds": {"K": bounds.K, "E": bounds.E, "certificate": bounds.certificate},
            "theta_bounds": {
                "theta1": float(np.max(np.abs(derived.theta.theta1))),
                "theta2": float(np.max(np.abs(derived.theta.theta2))),
            },
        }
        if report is None:
            result["verdict"] = "outside-theory"
            state["status"] = STATUS_OUTSIDE
        else:
            result.update(verdict="computed", N1=report.N1, N2=report.N2, certificate=report.certificate)
            print(f"Thresholds: N1 = {report.N1:.6g}, N2 = {report.N2:.6g}")
        state["result"] = result
        return state

    def _verify(self, state: RunState) -> RunState:
        config = state["config"]
        v = config.verify
        if config.mode == "verify-identities":
            suite = run_identity_suite(config.gas, seed=config.seed, n_samples=v.n_samples, workers=v.workers, only=v.only)
        else:
            suite = run_dynamics_suite(
                config.gas, base_cells=v.base_cells, levels=v.levels, seed=config.seed,
                workers=v.workers, cfl=config.time.cfl, only=v.only,
            )
        state["result"] = {**suite.as_dict(), "verdict": "passed" if suite.passed else "failed", "table": suite.table()}
        state["tables"] = {"checks": suite.as_frame()}
        state["status"] = STATUS_OK if suite.passed else STATUS_FAILED_SUITE
        print(suite.table())
        return state

    def _sweep(self, state: RunState) -> RunState:
        from .sweep import run_sweep

        base = f"{self.report_generator.run_dir_for(state)}/runs"
        summary = run_sweep(state["config"], base)
        failed = int((summary["status"] != STATUS_OK).sum()) if not summary.empty else 0
        state["result"] = {"runs": int(len(summary)), "failed": failed, "verdict": f"{len(summary) - failed} ok"}
        state["tables"] = {"summary": summary}
        return state

    def _monitor(self, state: RunState) -> RunState:
        history = state.get("history")
        if state["config"].mode != "simulate" or history is None:
            return state
        m = state["config"].monitor
        observation = monitor_blowup(history, m.growth_factor, refined=state.get("refined"), band=tuple(m.band))
        state["observation"] = observation.as_dict()
        state["result"]["observation"] = observation.as_dict()
        if observation.declared:
            verdict = "blow-up"
        elif observation.candidate:
            verdict = "blow-up candidate"
        else:
            verdict = "no blow-up"
        state["result"]["verdict"] = verdict
        if history.failure is not None and not observation.declared and not self.validator.should_refine(state):
            state["status"] = STATUS_NUMERICAL
        print(f"Monitor: {verdict} (growth {observation.growth:.3g})")
        return state

    def _refine(self, state: RunState) -> RunState:
        config, params = state["config"], state["params"]
        coarse = state["data"]
        scale = state["calibration"]["scale"] if state.get("calibration") else None
        fine_data = build_initial(config, cells=2 * coarse.cells, scale=scale)
        t_stop = min(config.time.t_end, state["observation"]["t_candidate"])
        refined = solve(
            fine_data, params, config.model, t_stop, cfl=config.time.cfl,
            output_cadence=config.time.cadence(), max_steps=config.time.max_steps,
        )
        state["refined"] = refined
        state["refine_count"] = state.get("refine_count", 0) + 1
        state["result"]["refined"] = {"cells": fine_data.cells, "t_final": refined.final.t, "stop_reason": refined.stop_reason}
        print(f"Refined run: {fine_data.cells} cells to t = {refined.final.t:.6g}")
        return state

    def initial_state(self) -> RunState:
        return {
            "config": self.config,
            "config_hash": config_hash(self.config),
            "params": None,
            "data": None,
            "calibration": None,
            "history": None,
            "refined": None,
            "refine_count": 0,
            "observation": None,
            "result": {},
            "tables": {},
            "status": STATUS_OK,
            "artifacts": [],
            "run_dir": None,
        }

    def run(self) -> RunState:
        """Run the complete graph for the configured mode."""
        print(f"Starting {self.config.mode} run ({self.config.model} model)")
        final_state = self.graph.invoke(self.initial_state())
        print("Run completed")
        return final_state
