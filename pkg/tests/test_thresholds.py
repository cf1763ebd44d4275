from __future__ import annotations

import numpy as np
import pytest

from src.eos import GasParams, sound_speed
from src.errors import InvalidInputError
from src.nonisentropic import ConservedAlongFlow, F_of, to_riemann_non
from src.thresholds import (
    coefficients_a_b,
    constants_226,
    decoupled_ode_rhs,
    density_lower_bound_check,
    local_threshold,
    psi_Psi_K,
    sonic_density_cap,
    thresholds_N1_N2,
)


@pytest.fixture(scope="module")
def bounds_no_entropy():
    return psi_Psi_K(GasParams(gamma=2.0, B=0.0))


def test_psi_reduces_to_half_gap_without_entropy(bounds_no_entropy) -> None:
    params = GasParams(gamma=2.0, B=0.0)
    for rho in (1e-4, 0.1, 1.0):
        assert bounds_no_entropy.psi(rho) == pytest.approx(F_of(rho, 0.0, params, method="closed"), rel=1e-8)
    assert bounds_no_entropy.psi(0.0) == 0.0
    assert bounds_no_entropy.psi_inv(bounds_no_entropy.psi(0.3)) == pytest.approx(0.3, rel=1e-8)


def test_psi_is_below_every_entropy_slice() -> None:
    params = GasParams(gamma=5.0 / 3.0, B=0.2)
    bounds = psi_Psi_K(params, samples=65)
    for rho in (0.01, 0.5):
        slices = [F_of(rho, S, params, method="closed") for S in (-0.2, 0.0, 0.2)]
        assert bounds.psi(rho) <= min(slices) * (1.0 + 1e-8)
    with pytest.raises(InvalidInputError):
        bounds.psi(-1.0)


def test_K_and_Psi_vacuum_limits(bounds_no_entropy) -> None:
    # both ratios decrease in the density, so the suprema are the vacuum limits
    gamma = 2.0
    assert bounds_no_entropy.K == pytest.approx((gamma - 1.0) / (4.0 * gamma), rel=1e-5)
    assert bounds_no_entropy.Psi(1.0) == pytest.approx((gamma - 1.0) / 2.0, rel=1e-6)
    assert bounds_no_entropy.E == float("inf")
    assert bounds_no_entropy.certificate["K_relative_change"] < 1e-3
    with pytest.raises(InvalidInputError):
        bounds_no_entropy.Psi(0.0)


def test_sonic_density_cap() -> None:
    assert sonic_density_cap(GasParams(gamma=2.0), -1.0, 1.0) == float("inf")
    params = GasParams(gamma=3.0, B=0.0)
    E = sonic_density_cap(params, 0.0, 0.0)
    assert np.isfinite(E)
    assert sound_speed(E, 0.0, params) == pytest.approx(params.c, rel=1e-8)


def test_local_threshold_bounds_quadratic() -> None:
    rng = np.random.default_rng(0)
    k = rng.uniform(0.1, 2.0, 50)
    c3 = rng.normal(size=50)
    c4 = rng.normal(size=50)
    N = local_threshold(k, c3, c4)
    for v in np.linspace(-20.0, 20.0, 81):
        assert np.all(-k * v ** 2 + c3 * v + c4 <= -0.5 * k * (v ** 2 - N ** 2) + 1e-9)


def test_decoupled_rhs_without_entropy_gradients() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    rho = np.array([0.05, 0.1, 0.2])
    triple = to_riemann_non(rho, np.array([0.1, 0.0, -0.1]), np.array([0.05, 0.0, -0.05]), params)
    w, z, _ = triple.arrays()
    eps = 0.25 * float(np.min(z - w))
    zeros = np.zeros(3)
    v = np.array([1.0, -2.0, 0.5])
    for family in ("r", "q"):
        out = decoupled_ode_rhs(v, triple, ConservedAlongFlow(zeros, zeros), params, eps, family=family)
        assert np.all(out.k > 0.0)
        np.testing.assert_allclose(out.N_local, 0.0, atol=1e-14)
        np.testing.assert_allclose(out.rhs, -out.k * v ** 2, rtol=1e-12, atol=1e-14)
    with pytest.raises(InvalidInputError):
        decoupled_ode_rhs(v, triple, ConservedAlongFlow(zeros, zeros), params, eps, family="s")


def test_coefficients_scale_with_the_entropy_gradient() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    triple = to_riemann_non(np.array([0.05, 0.1, 0.2]), np.array([0.1, 0.0, -0.1]), np.array([0.05, 0.0, -0.05]), params)
    w, z, _ = triple.arrays()
    eps = 0.25 * float(np.min(z - w))
    zeros = np.zeros(3)
    flat = coefficients_a_b(triple, ConservedAlongFlow(zeros, zeros), params, eps)
    live = ~flat.singular
    assert live.any()
    for name in ("a0", "a1", "a2", "a3", "a4", "b0", "b1", "b2", "b3", "b4"):
        np.testing.assert_array_equal(getattr(flat, name)[live], 0.0)
    assert np.all(flat.k_r > 0.0) and np.all(flat.k_q > 0.0)

    one = coefficients_a_b(triple, ConservedAlongFlow(np.full(3, 0.1), zeros), params, eps)
    two = coefficients_a_b(triple, ConservedAlongFlow(np.full(3, 0.2), zeros), params, eps)
    # linear and quadratic in theta1 when theta2 vanishes
    np.testing.assert_allclose(two.a3[live], 2.0 * one.a3[live], rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(two.b3[live], 2.0 * one.b3[live], rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(two.a4[live], 4.0 * one.a4[live], rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(two.b4[live], 4.0 * one.b4[live], rtol=1e-10, atol=1e-14)


def test_thresholds_vanish_for_zero_conserved_bounds() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    report = thresholds_N1_N2(params, 0.5, 0.5, (0.0, 0.0), eps=0.05, grid_points=5)
    assert (report.N1, report.N2) == (0.0, 0.0)
    assert report.certificate["converged"]


def test_thresholds_scale_linearly_in_theta1() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    one = thresholds_N1_N2(params, 0.5, 0.5, (0.1, 0.0), eps=0.05, grid_points=5, refine=False)
    two = thresholds_N1_N2(params, 0.5, 0.5, (0.2, 0.0), eps=0.05, grid_points=5, refine=False)
    assert one.N1 > 0.0 and one.N2 > 0.0
    assert two.N1 == pytest.approx(2.0 * one.N1, rel=1e-10)
    assert two.N2 == pytest.approx(2.0 * one.N2, rel=1e-10)
    assert one.certificate["grid_states"] > 0

def test_threshold_certificate_compares_doubled_grids() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    coarse = thresholds_N1_N2(params, 0.5, 0.5, (0.1, 0.05), eps=0.05, grid_points=5, refine=False)
    finer = thresholds_N1_N2(params, 0.5, 0.5, (0.1, 0.05), eps=0.05, grid_points=9, refine=False)
    cert = coarse.certificate
    assert cert["doubled_grid_points"] == 9
    assert cert["doubled"] == finer.certificate["grid"]
    assert [coarse.N1, coarse.N2] == cert["doubled"]
    assert cert["doubled_grid_states"] > cert["grid_states"]
    expected = [abs(d - g) / d for d, g in zip(cert["doubled"], cert["grid"])]
    assert cert["grid_change"] == pytest.approx(expected, rel=1e-12)
    assert cert["converged"] == all(ch < 1e-2 for ch in expected)


def test_polish_never_lowers_the_doubled_grid_sup() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    report = thresholds_N1_N2(params, 0.5, 0.5, (0.1, 0.05), eps=0.05, grid_points=5, max_starts=2)
    cert = report.certificate
    assert report.N1 >= cert["doubled"][0]
    assert report.N2 >= cert["doubled"][1]
    assert set(cert) >= {"grid", "doubled", "grid_change", "refined", "relative_change", "converged"}



def test_thresholds_reject_bad_inputs() -> None:
    params = GasParams(gamma=2.0, B=0.1)
    with pytest.raises(InvalidInputError):
        thresholds_N1_N2(params, 0.5, 0.5, (0.1, 0.1), eps=0.0)
    with pytest.raises(InvalidInputError):
        thresholds_N1_N2(params, 0.0, 0.0, (0.1, 0.1), eps=0.05, grid_points=5)


def test_constants_without_entropy_variation(bounds_no_entropy) -> None:
    params = GasParams(gamma=2.0, B=0.0)
    x = np.linspace(-1.0, 1.0, 11)
    rho = 0.1 + 0.05 * np.cos(x)
    u = 0.1 * np.tanh(x)
    triple = to_riemann_non(rho, u, np.zeros_like(x), params)
    w0, z0, S0 = triple.arrays()
    out = constants_226(w0, z0, S0, params, bounds=bounds_no_entropy)
    assert out.tv == 0.0 and out.V == 1.0
    assert out.max_w == pytest.approx(np.max(np.abs(w0)))
    assert out.max_z == pytest.approx(np.max(np.abs(z0)))
    half = 0.5 * (out.max_w + out.max_z)
    assert F_of(out.M2, 0.0, params, method="closed") == pytest.approx(half, rel=1e-7)
    assert out.assumption_value == pytest.approx(bounds_no_entropy.Psi(out.M2) * half)
    assert out.assumption_holds == (out.assumption_margin > 0.0)
    assert out.eps == pytest.approx(0.5 * np.min(z0 - w0))
    assert out.as_dict()["assumption_holds"] == out.assumption_holds


def test_constants_total_variation(bounds_no_entropy) -> None:
    params = GasParams(gamma=2.0, B=0.1)
    S0 = np.array([0.0, 0.05, 0.1])
    triple = to_riemann_non(np.full(3, 0.1), np.zeros(3), S0, params)
    w0, z0, _ = triple.arrays()
    line = constants_226(w0, z0, S0, params, bounds=bounds_no_entropy)
    ring = constants_226(w0, z0, S0, params, bounds=bounds_no_entropy, periodic=True)
    assert line.tv == pytest.approx(0.1)
    assert ring.tv == pytest.approx(0.2)
    assert ring.V == pytest.approx(np.exp(bounds_no_entropy.K * 0.2))
    assert ring.max_w >= line.max_w
    with pytest.raises(InvalidInputError):
        constants_226(w0[:1], z0[:1], S0[:1], params, bounds=bounds_no_entropy)


def test_density_lower_bound_check() -> None:
    params = GasParams(gamma=2.0)
    t = np.linspace(0.0, 50.0, 101)
    steady = 0.2 * (t + 1.0) ** (-4.0)
    report = density_lower_bound_check([(t, steady)], params)
    assert report.applicable and report.bounded
    assert report.exponent == pytest.approx(0.25)
    assert report.log_slope == pytest.approx(0.0, abs=1e-10)
    assert report.D == pytest.approx(1.0 / 0.2 ** 0.25)

    collapsing = 0.2 * (t + 1.0) ** (-12.0)
    assert not density_lower_bound_check([(t, collapsing)], params).bounded

    assert not density_lower_bound_check([(t, steady)], GasParams(gamma=3.0)).applicable
    with pytest.raises(InvalidInputError):
        density_lower_bound_check([], params)
