from __future__ import annotations

import numpy as np
import pytest

from src import verify
from src.eos import GasParams
from src.errors import DomainError
from src.isentropic import sonic_gap
from src.verify import (
    IdentityCheck,
    IdentitySuiteResult,
    base_density,
    run_dynamics_suite,
    run_identity_suite,
    sample_iso,
)

PARAMS = GasParams(gamma=2.0, B=0.2)
CHEAP = ["eigen_routes", "iso_round_trip", "noniso_round_trip"]


def test_identity_subset_passes() -> None:
    suite = run_identity_suite(PARAMS, seed=1, n_samples=16, only=CHEAP)
    assert suite.suite == "identities"
    assert [c.name for c in suite.checks] == CHEAP
    assert suite.passed, suite.table()
    assert suite.failed == []
    assert all(c.samples > 0 for c in suite.checks)


def test_identity_suite_ignores_scheduling() -> None:
    one = run_identity_suite(PARAMS, seed=3, n_samples=16, workers=1, only=CHEAP)
    many = run_identity_suite(PARAMS, seed=3, n_samples=16, workers=4, only=CHEAP)
    assert [c.max_residual for c in one.checks] == [c.max_residual for c in many.checks]


def test_raising_checks_are_reported_not_raised(monkeypatch) -> None:
    def boom(params: GasParams, rng: np.random.Generator, n: int) -> IdentityCheck:
        raise DomainError("state left the wedge")

    monkeypatch.setitem(verify.IDENTITY_CHECKS, "boom", boom)
    suite = run_identity_suite(PARAMS, n_samples=8, only=["boom", "iso_round_trip"])
    assert not suite.passed
    assert suite.failed == ["boom"]
    failed = suite.checks[0]
    assert failed.relation == "raised" and failed.max_residual == float("inf")
    assert "DomainError" in failed.details["error"]


def test_suite_result_tables() -> None:
    checks = [
        IdentityCheck("b", "x = x", 3, 1e-14, 1e-12, True),
        IdentityCheck("a", "y = y", 2, 1.0, 1e-12, False, {"note": 1}),
    ]
    result = IdentitySuiteResult("identities", 0, checks)
    frame = result.as_frame()
    assert frame.columns.tolist() == ["name", "relation", "samples", "max_residual", "tolerance", "passed"]
    assert frame["passed"].tolist() == [True, False]
    assert "y = y" in result.table()
    summary = result.as_dict()
    assert summary["failed"] == ["a"] and summary["passed"] is False
    assert summary["checks"][1]["details"] == {"note": 1}


def test_empty_selection_is_vacuously_passed() -> None:
    suite = run_identity_suite(PARAMS, only=["no_such_check"])
    assert suite.checks == [] and suite.passed


def test_isentropic_samples_stay_below_the_sonic_gap() -> None:
    w, z = sample_iso(np.random.default_rng(0), PARAMS, 200)
    gap = z - w
    assert np.all(gap > 0.0) and np.all(gap < sonic_gap(PARAMS))
    assert np.all(np.abs(w) <= PARAMS.c)


@pytest.mark.parametrize("model", ["isentropic", "full"])
def test_base_density_is_positive(model: str) -> None:
    rho = base_density(PARAMS, model)
    assert 0.0 < rho < 1.0


def test_dynamics_constant_state() -> None:
    suite = run_dynamics_suite(PARAMS, base_cells=64, levels=2, only=["constant_state"])
    assert suite.suite == "dynamics"
    assert [c.name for c in suite.checks] == ["constant_state"]
    assert suite.passed, suite.table()


def test_identity_suite_passes_at_defaults() -> None:
    suite = run_identity_suite(GasParams(), seed=7)
    assert suite.passed, suite.table()


@pytest.mark.parametrize(
    "params",
    [GasParams(B=0.05), GasParams(B=0.5), GasParams(gamma=1.4, B=0.5)],
    ids=["gamma2-B0.05", "gamma2-B0.5", "gamma1.4-B0.5"],
)
def test_identity_suite_passes_across_gases(params: GasParams) -> None:
    suite = run_identity_suite(params, seed=7, n_samples=40)
    assert suite.passed, suite.table()


def test_entropy_derivative_of_rest_mass_is_accurate() -> None:
    suite = run_identity_suite(GasParams(), seed=7, only=["eos_derivatives"])
    (check,) = suite.checks
    assert check.passed, check.details
    assert check.max_residual < 1e-6


def test_near_vacuum_checks_for_a_soft_gas() -> None:
    suite = run_identity_suite(GasParams(gamma=1.4, B=0.5), seed=7, n_samples=40,
                               only=["asymptotic_orders", "jacobian", "weight_vacuum_slope"])
    assert [c.name for c in suite.checks] == ["asymptotic_orders", "jacobian", "weight_vacuum_slope"]
    assert suite.passed, suite.table()
    jacobian = suite.checks[1]
    assert np.isfinite(jacobian.max_residual)
    assert "singular" in jacobian.details


def test_derivative_pack_entropy_columns_vanish() -> None:
    suite = run_identity_suite(GasParams(), seed=7, only=["derivative_pack"])
    assert suite.passed, suite.table()


@pytest.mark.parametrize(
    "name,base_cells,expected",
    [
        ("convergence_order", 64, ["convergence_order"]),
        ("entropy_bound", 64, ["entropy_bound"]),
        ("invariant_drift", 128, ["invariant_drift"]),
        ("theta_drift", 128, ["theta_drift"]),
        ("n_tilde_law", 128, ["n_tilde_law"]),
        ("r_equation", 128, ["r_equation"]),
        ("blowup_time", 128, ["blowup_signature", "blowup_time"]),
        ("compression", 128, ["crossings", "density_lower_bound", "riccati_fidelity", "run_band_constant",
                              "xi_upper_bound", "zeta_upper_bound"]),
    ],
)
def test_dynamics_checks_on_small_grids(name: str, base_cells: int, expected: list[str]) -> None:
    suite = run_dynamics_suite(PARAMS, base_cells=base_cells, levels=2, only=[name])
    assert [c.name for c in suite.checks] == expected
    assert suite.passed, suite.table()


def test_blowup_time_reports_prediction_and_observation() -> None:
    suite = run_dynamics_suite(PARAMS, base_cells=128, levels=2, only=["blowup_time"])
    timing = {c.name: c for c in suite.checks}["blowup_time"]
    assert timing.details["t_predicted"] > 0.0
    assert timing.details["window"][0] <= timing.details["t_predicted"]
    assert timing.details["observation"]["candidate"]
