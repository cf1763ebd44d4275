from __future__ import annotations

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from src.eos import GasParams
from src.errors import InvalidInputError
from src.isentropic import to_riemann_iso
from src.nonisentropic import to_riemann_non
from src.profiles import (
    FieldProfile,
    InitialData,
    cell_centers,
    derive_initial,
    from_profiles,
    load_csv,
    simple_wave,
)


def test_cell_centers() -> None:
    x = cell_centers(0.0, 1.0, 4)
    np.testing.assert_allclose(x, [0.125, 0.375, 0.625, 0.875])
    with pytest.raises(InvalidInputError):
        cell_centers(1.0, 0.0, 4)
    with pytest.raises(InvalidInputError):
        cell_centers(0.0, 1.0, 1)


def test_field_profiles() -> None:
    x = np.linspace(-2.0, 2.0, 9)
    assert np.all(FieldProfile(base=0.3, amplitude=5.0).evaluate(x, -2.0, 2.0) == 0.3)
    bump = FieldProfile(family="gaussian-bump", base=0.1, amplitude=0.2, width=0.5)
    assert bump.evaluate(np.array([0.0]), -2.0, 2.0)[0] == pytest.approx(0.3)
    ramp = FieldProfile(family="tanh-ramp", amplitude=0.2)
    np.testing.assert_allclose(ramp.evaluate(x, -2.0, 2.0, scale=0.5), 0.1 * np.tanh(x))
    sine = FieldProfile(family="sine", amplitude=1.0, wavenumber=2)
    assert sine.evaluate(np.array([-1.5]), -2.0, 2.0)[0] == pytest.approx(1.0)
    assert ramp.sup_abs(scale=2.0) == pytest.approx(0.4)
    assert FieldProfile(base=-0.2, amplitude=3.0).sup_abs() == pytest.approx(0.2)
    with pytest.raises(ValidationError):
        FieldProfile(family="square")
    with pytest.raises(ValidationError):
        FieldProfile(width=0.0)


def test_from_profiles_scales_velocity_only() -> None:
    rho = FieldProfile(base=0.1, family="sine", amplitude=0.01)
    u = FieldProfile(family="sine", amplitude=0.1)
    S = FieldProfile(family="sine", amplitude=0.05)
    data = from_profiles(rho, u, S, 0.0, 2.0 * np.pi, 64, periodic=True, scale=0.5)
    assert data.cells == 64 and data.periodic
    assert data.dx == pytest.approx(2.0 * np.pi / 64)
    np.testing.assert_allclose(data.u, 0.05 * np.sin(data.x), atol=1e-15)
    np.testing.assert_allclose(data.S, 0.05 * np.sin(data.x), atol=1e-15)
    np.testing.assert_allclose(data.rho, 0.1 + 0.01 * np.sin(data.x), atol=1e-15)


def test_resample_wraps_periodic_data() -> None:
    x = cell_centers(0.0, 1.0, 8)
    data = InitialData(x, np.sin(2 * np.pi * x), np.zeros(8), np.zeros(8), periodic=True)
    fine = data.resample(cell_centers(0.0, 1.0, 16))
    assert fine.cells == 16
    # 1/32 sits three quarters of the way from the wrapped last center to the first one
    assert fine.rho[0] == pytest.approx(0.25 * data.rho[-1] + 0.75 * data.rho[0])
    assert fine.rho[-1] == pytest.approx(0.75 * data.rho[-1] + 0.25 * data.rho[0])


def test_load_csv(tmp_path) -> None:
    x = np.linspace(0.0, 1.0, 6)
    path = tmp_path / "data.csv"
    pd.DataFrame({"x": x, "rho": 0.1, "u": 0.0, "S": 0.0, "extra": 1}).to_csv(path, index=False)
    data = load_csv(str(path), periodic=False)
    assert data.cells == 6
    np.testing.assert_allclose(data.rho, 0.1)
    assert data.as_frame().columns.tolist() == ["x", "rho", "u", "S"]


@pytest.mark.parametrize(
    "frame",
    [
        pd.DataFrame({"x": np.linspace(0, 1, 6), "rho": 0.1, "u": 0.0}),
        pd.DataFrame({"x": [0.0, 0.1, 0.3, 0.4, 0.5, 0.6], "rho": 0.1, "u": 0.0, "S": 0.0}),
        pd.DataFrame({"x": np.linspace(0, 1, 3), "rho": 0.1, "u": 0.0, "S": 0.0}),
        pd.DataFrame({"x": np.linspace(0, 1, 6), "rho": [0.1, None, 0.1, 0.1, 0.1, 0.1], "u": 0.0, "S": 0.0}),
    ],
)
def test_load_csv_rejects_bad_files(tmp_path, frame: pd.DataFrame) -> None:
    path = tmp_path / "bad.csv"
    frame.to_csv(path, index=False)
    with pytest.raises(InvalidInputError):
        load_csv(str(path), periodic=False)


def test_simple_wave_keeps_w_constant() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    x = np.linspace(-5.0, 5.0, 101)
    iso = simple_wave(x, params, "isentropic", w_const=-0.4, z_lo=0.0, z_hi=0.2)
    pair = to_riemann_iso(iso.rho, iso.u, params)
    np.testing.assert_allclose(pair.w, -0.4, atol=1e-10)
    assert np.all(np.diff(pair.z) >= 0.0)

    full = simple_wave(x, params, "full", w_const=-0.4, z_lo=0.0, z_hi=0.2, S_const=0.05)
    w, z, S = to_riemann_non(full.rho, full.u, full.S, params).arrays()
    np.testing.assert_allclose(w, -0.4, atol=1e-10)
    np.testing.assert_array_equal(S, 0.05)


def test_derive_initial_isentropic() -> None:
    params = GasParams(gamma=2.0)
    x = cell_centers(0.0, 2.0 * np.pi, 256)
    data = InitialData(x, np.full_like(x, 0.1), 0.05 * np.sin(x), np.zeros_like(x), periodic=True)
    derived = derive_initial(data, params, "isentropic")
    assert derived.xi0 is not None and derived.r0 is None
    assert not derived.vacuum.any()
    # d/dx of the velocity half sum is the mean of the two Riemann gradients
    half_sum = 0.5 * (derived.dx_w + derived.dx_z)
    u_prime = 0.05 * np.cos(x) / (1.0 - (0.05 * np.sin(x)) ** 2)
    np.testing.assert_allclose(half_sum, u_prime, atol=1e-7)


def test_derive_initial_full_model() -> None:
    params = GasParams(gamma=5.0 / 3.0, B=0.1)
    x = cell_centers(0.0, 2.0 * np.pi, 256)
    data = InitialData(x, np.full_like(x, 0.1), np.zeros_like(x), 0.05 * np.sin(x), periodic=True)
    derived = derive_initial(data, params, "full")
    np.testing.assert_allclose(derived.eta0, 0.05 * np.cos(x), atol=1e-7)
    np.testing.assert_allclose(derived.dxx_S0, -0.05 * np.sin(x), atol=1e-6)
    np.testing.assert_allclose(derived.theta.theta1, derived.eta0 / derived.n_t0)
    assert derived.eps == pytest.approx(0.5 * np.min(derived.z0 - derived.w0))
    assert derived.r0 is not None and np.all(np.isfinite(derived.r0))


def test_derive_initial_full_model_at_vacuum() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    x = cell_centers(-1.0, 1.0, 32)
    data = InitialData(x, np.clip(x, 0.0, None) * 0.1, np.zeros_like(x), np.zeros_like(x), periodic=False)
    derived = derive_initial(data, params, "full")
    assert derived.eps == 0.0
    assert derived.r0 is None and derived.q0 is None
    assert derived.vacuum.sum() == 16
