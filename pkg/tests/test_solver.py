from __future__ import annotations

import numpy as np
import pytest

from src.eos import GasParams
from src.errors import InvalidInputError, RecoveryError
from src.isentropic import to_riemann_iso
from src.nonisentropic import to_riemann_non
from src.profiles import InitialData, cell_centers
from src.solver import (
    RunHistory,
    cons_to_prim,
    conservation_drift,
    make_law,
    monitor_blowup,
    n_tilde_residual,
    prim_to_cons,
    recover,
    solve,
    step,
)

PARAMS = GasParams(gamma=2.0, B=0.2)


def _periodic(cells: int, rho: np.ndarray | float, u: np.ndarray | float, S: np.ndarray | float = 0.0) -> InitialData:
    x = cell_centers(0.0, 2.0 * np.pi, cells)
    fields = [np.broadcast_to(np.asarray(v, dtype=float), x.shape).copy() for v in (rho, u, S)]
    return InitialData(x, *fields, periodic=True)


@pytest.mark.parametrize("model", ["isentropic", "full"])
def test_primitive_round_trip(model: str) -> None:
    rng = np.random.default_rng(4)
    rho = np.exp(rng.uniform(np.log(1e-6), np.log(0.3), 400))
    u = rng.uniform(-0.95, 0.95, 400)
    S = rng.uniform(-0.2, 0.2, 400)
    prim = cons_to_prim(prim_to_cons(rho, u, S, PARAMS, model), PARAMS, model)
    np.testing.assert_allclose(prim.rho, rho, rtol=1e-10)
    np.testing.assert_allclose(prim.u, u, rtol=1e-10, atol=1e-12)
    np.testing.assert_array_equal(prim.S, S)


def test_recovery_rejects_unphysical_states() -> None:
    law = make_law("full", PARAMS)
    with pytest.raises(RecoveryError) as err:
        recover(law, np.array([1.0, -1.0, 1.0]), np.zeros(3), np.zeros(3))
    assert err.value.cells == [1]
    with pytest.raises(RecoveryError):
        recover(law, np.array([1.0]), np.array([2.0]), np.array([0.0]))


def test_constructor_validation() -> None:
    data = _periodic(16, 0.1, 0.0)
    with pytest.raises(InvalidInputError):
        solve(data, PARAMS, "isentropic", 1.0, cfl=1.5)
    with pytest.raises(InvalidInputError):
        solve(data, PARAMS, "plasma", 1.0)
    with pytest.raises(InvalidInputError):
        solve(data, PARAMS, "isentropic", 0.0)


@pytest.mark.parametrize("model", ["isentropic", "full"])
def test_constant_state_is_preserved(model: str) -> None:
    data = _periodic(64, 0.1, 0.3, 0.05)
    history = solve(data, PARAMS, model, 0.5, output_cadence=0.1)
    assert history.stop_reason == "t_end"
    assert history.final.t == pytest.approx(0.5)
    assert len(history.snapshots) == 6
    np.testing.assert_allclose(history.final.rho, 0.1, rtol=1e-10)
    np.testing.assert_allclose(history.final.u, 0.3, rtol=1e-12)
    obs = monitor_blowup(history)
    assert not obs.candidate and obs.reason == "no candidate"


@pytest.mark.parametrize("model", ["isentropic", "full"])
def test_periodic_runs_conserve_totals(model: str) -> None:
    x = cell_centers(0.0, 2.0 * np.pi, 128)
    data = _periodic(128, 0.1 + 0.02 * np.sin(x), 0.05 * np.cos(x), 0.1 * np.sin(x))
    history = solve(data, PARAMS, model, 1.0, output_cadence=0.25)
    drift = conservation_drift(history)
    assert drift["total_D"] < 1e-12
    assert drift["total_m"] < 1e-12
    assert np.max(np.abs(history.final.S)) <= 0.1 + 1e-12


def test_snapshot_riemann_fields_match_transforms() -> None:
    x = cell_centers(0.0, 2.0 * np.pi, 32)
    data = _periodic(32, 0.1 + 0.02 * np.sin(x), 0.05 * np.cos(x), 0.1 * np.sin(x))
    full = solve(data, PARAMS, "full", 0.1).snapshots[0]
    w, z, _ = to_riemann_non(full.rho, full.u, full.S, PARAMS).arrays()
    np.testing.assert_allclose(full.w, w, atol=1e-10)
    np.testing.assert_allclose(full.z, z, atol=1e-10)
    iso = solve(data, PARAMS, "isentropic", 0.1).snapshots[0]
    pair = to_riemann_iso(iso.rho, iso.u, PARAMS)
    np.testing.assert_allclose(iso.w, pair.w, atol=1e-12)
    np.testing.assert_allclose(iso.z, pair.z, atol=1e-12)


def test_max_steps_stops_the_run() -> None:
    x = cell_centers(0.0, 2.0 * np.pi, 32)
    history = solve(_periodic(32, 0.1, 0.1 * np.sin(x)), PARAMS, "isentropic", 10.0, max_steps=3)
    assert history.stop_reason == "max_steps"
    assert history.steps == 3
    assert len(history.monitor["t"]) == 4


def test_single_step_advances_time() -> None:
    x = cell_centers(0.0, 2.0 * np.pi, 32)
    snap = solve(_periodic(32, 0.1, 0.1 * np.sin(x)), PARAMS, "isentropic", 0.01).snapshots[0]
    nxt = step(snap, 0.4, PARAMS, "isentropic", periodic=True)
    assert nxt.t > snap.t
    assert nxt.rho.shape == snap.rho.shape


def test_compression_grows_gradients_and_flags_a_candidate() -> None:
    x = cell_centers(0.0, 2.0 * np.pi, 128)
    history = solve(_periodic(128, 0.1, 0.1 * np.sin(x)), PARAMS, "isentropic", 100.0,
                    output_cadence=0.5, stop_growth=3.0)
    assert history.stop_reason == "growth"
    assert history.final.t < 100.0

    obs = monitor_blowup(history, growth_factor=2.9)
    assert obs.candidate and not obs.declared
    assert obs.growth >= 2.9
    assert obs.window[0] <= obs.t_candidate == obs.window[1]
    assert 0.0 <= obs.location <= 2.0 * np.pi

    # a refined run whose peaks are twice as large lands inside the band
    refined = RunHistory(model="isentropic", params=PARAMS, dx=history.dx / 2.0, periodic=True)
    refined.monitor = {key: list(history.monitor[key]) for key in ("t", "max_dxz", "max_dxw")}
    refined.monitor["max_dxz"] = [2.0 * v for v in refined.monitor["max_dxz"]]
    refined.monitor["max_dxw"] = [2.0 * v for v in refined.monitor["max_dxw"]]
    declared = monitor_blowup(history, growth_factor=2.9, refined=refined)
    assert declared.declared
    assert declared.ratio == pytest.approx(2.0)
    assert declared.as_dict()["window"] == list(declared.window)


def test_n_tilde_residual() -> None:
    x = cell_centers(0.0, 2.0 * np.pi, 256)
    data = _periodic(256, 0.1, 0.01 * np.sin(x), 0.05 * np.sin(x))
    full = solve(data, PARAMS, "full", 0.5, output_cadence=0.05)
    assert n_tilde_residual(full) < 1e-2
    iso = solve(data, PARAMS, "isentropic", 0.1)
    assert n_tilde_residual(iso) is None
