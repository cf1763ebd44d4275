from __future__ import annotations

import numpy as np
import pytest

from src.differencing import richardson_difference
from src.eos import GasParams
from src.errors import AdmissibilityError, SingularWeightError
from src.nonisentropic import (
    RiemannTriple,
    a_coefficient,
    conserved_along_flow,
    density_from_gap,
    eigenvalues_from_HG,
    eigenvalues_non,
    exponents_HG,
    F_of,
    from_riemann_non,
    gradient_state_non,
    jacobian_phi,
    lemma48_derivatives,
    riemann_frame,
    root_lambda,
    sonic_half_gap,
    to_riemann_non,
    weight_integrals,
    weight_partials,
    weights_h_g_L_M,
)

PARAMS = GasParams(gamma=5.0 / 3.0, B=0.5)


def _states(n: int = 40, seed: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    rho = np.exp(rng.uniform(np.log(1e-3), np.log(0.3), n))
    return rho, rng.uniform(-0.5, 0.5, n), rng.uniform(-0.3, 0.3, n)


def test_F_closed_matches_quadrature() -> None:
    rho, _, S = _states(10)
    closed = np.asarray(F_of(rho, S, PARAMS, method="closed"))
    quad = np.asarray(F_of(rho, S, PARAMS, method="quadrature"))
    np.testing.assert_allclose(quad, closed, rtol=1e-8)


def test_F_vanishes_at_vacuum() -> None:
    assert F_of(0.0, 0.2, PARAMS, method="closed") == 0.0
    assert F_of(0.0, 0.2, PARAMS, method="quadrature") == 0.0


def test_round_trip() -> None:
    rho, u, S = _states(500)
    rho2, u2, S2 = from_riemann_non(to_riemann_non(rho, u, S, PARAMS), PARAMS)
    np.testing.assert_allclose(rho2, rho, rtol=1e-10)
    np.testing.assert_allclose(u2, u, rtol=1e-12, atol=1e-14)
    np.testing.assert_array_equal(S2, S)


def test_bracketed_inverse_matches_closed() -> None:
    rho, _, S = _states(5)
    F = np.asarray(F_of(rho, S, PARAMS, method="closed"))
    closed = np.asarray(density_from_gap(F, S, PARAMS))
    bracket = np.asarray(density_from_gap(F, S, PARAMS, method="bracket"))
    np.testing.assert_allclose(closed, rho, rtol=1e-10)
    np.testing.assert_allclose(bracket, rho, rtol=1e-7)


def test_admissibility_errors() -> None:
    with pytest.raises(AdmissibilityError):
        from_riemann_non(RiemannTriple(0.2, 0.1, 0.0), PARAMS)
    with pytest.raises(AdmissibilityError):
        to_riemann_non(0.1, 0.0, 0.6, PARAMS)
    with pytest.raises(AdmissibilityError):
        from_riemann_non(RiemannTriple(0.0, 0.1, -0.7), PARAMS)


def test_sonic_half_gap() -> None:
    assert sonic_half_gap(GasParams(gamma=2.0)) == float("inf")
    params = GasParams(gamma=3.0)
    F = sonic_half_gap(params)
    assert np.isfinite(F)
    assert root_lambda(F, params) == pytest.approx(params.c, rel=1e-12)
    with pytest.raises(AdmissibilityError):
        from_riemann_non(RiemannTriple(0.0, 2.0 * F, 0.0), params)


def test_eigenvalue_routes_and_order() -> None:
    rho, u, S = _states(100)
    lam1, lam2, lam3 = eigenvalues_non(rho, u, S, PARAMS)
    assert np.all(lam3 < lam1) and np.all(lam1 < lam2)
    assert np.all(np.abs(lam2) < PARAMS.c) and np.all(np.abs(lam3) < PARAMS.c)
    triple = to_riemann_non(rho, u, S, PARAMS)
    l2, l3 = eigenvalues_from_HG(*exponents_HG(triple, PARAMS), PARAMS)
    np.testing.assert_allclose(l2, lam2, atol=1e-10)
    np.testing.assert_allclose(l3, lam3, atol=1e-10)


def test_a_coefficient_methods_agree() -> None:
    rho, _, S = _states(4)
    closed = np.asarray(a_coefficient(rho, S, PARAMS, method="closed"))
    assert np.all(closed < 0.0)
    for method in ("integral", "formula"):
        np.testing.assert_allclose(np.asarray(a_coefficient(rho, S, PARAMS, method=method)), closed, rtol=1e-5)
    assert a_coefficient(0.0, 0.1, PARAMS, method="integral") == 0.0


def test_lemma48_derivatives_match_differences() -> None:
    rho, u, S = _states(30)
    triple = to_riemann_non(rho, u, S, PARAMS)
    w, z, S = triple.arrays()
    d = lemma48_derivatives(triple, PARAMS)
    h = 1e-3 * (z - w)

    def values(ww: np.ndarray, zz: np.ndarray, ss: np.ndarray) -> dict[str, np.ndarray]:
        f = riemann_frame(ww, zz, ss, PARAMS)
        return {"Lambda": f.root_lambda ** 2, "H": f.H, "lambda2": f.lam2, "n_t": f.n_t}

    for key in ("Lambda", "H", "lambda2", "n_t"):
        dw = richardson_difference(lambda x: values(x, z, S)[key], w, h)
        dz = richardson_difference(lambda x: values(w, x, S)[key], z, h)
        dS = richardson_difference(lambda x: values(w, z, x)[key], S, np.full_like(S, 1e-3))
        for approx, exact in ((dw, d[key]["dw"]), (dz, d[key]["dz"]), (dS, d[key]["dS"])):
            np.testing.assert_allclose(approx, exact, rtol=1e-5, atol=1e-6)
    np.testing.assert_array_equal(d["a"]["dw"], -d["a"]["dz"])
    np.testing.assert_array_equal(d["G"]["dS"], -d["H"]["dS"])


@pytest.mark.parametrize("gamma,B", [(1.4, 0.05), (2.0, 1.0), (3.0, 0.5)])
def test_entropy_partials_at_fixed_riemann_variables(gamma: float, B: float) -> None:
    params = GasParams(gamma=gamma, B=B)
    rho, u, S = _states(25, seed=4)
    triple = to_riemann_non(rho, u, np.clip(S, -0.9 * B, 0.9 * B), params)
    w, z, S = triple.arrays()
    d = lemma48_derivatives(triple, params)
    for key in ("Lambda", "H", "G", "lambda2", "lambda3", "a"):
        np.testing.assert_array_equal(d[key]["dS"], 0.0)

    # the same quantities through the (rho, S) route do not move either
    def through_density(ss: np.ndarray) -> np.ndarray:
        f = riemann_frame(w, z, ss, params)
        return np.asarray(a_coefficient(f.rho, ss, params, method="closed"))

    drift = richardson_difference(through_density, S, np.full_like(S, 1e-3))
    np.testing.assert_allclose(drift, 0.0, atol=1e-8 * np.max(np.abs(d["a"]["value"])) + 1e-12)

    dS_nt = richardson_difference(lambda ss: riemann_frame(w, z, ss, params).n_t, S, np.full_like(S, 1e-3))
    np.testing.assert_allclose(d["n_t"]["dS"], -d["n_t"]["value"] / params.R, rtol=1e-13)
    np.testing.assert_allclose(dS_nt, d["n_t"]["dS"], rtol=1e-8)


def test_derivatives_need_nonvacuum() -> None:
    with pytest.raises(SingularWeightError):
        lemma48_derivatives(RiemannTriple(0.1, 0.1, 0.0), PARAMS)


def test_jacobian_matches_differences() -> None:
    rho, u, S = _states(20)
    J = jacobian_phi(rho, u, S, PARAMS)
    assert J.shape == (20, 3, 3)
    step = 1e-5 * rho
    fwd = np.stack(to_riemann_non(rho + step, u, S, PARAMS).arrays(), axis=-1)
    bwd = np.stack(to_riemann_non(rho - step, u, S, PARAMS).arrays(), axis=-1)
    np.testing.assert_allclose((fwd - bwd) / (2.0 * step[:, None]), J[..., 0], rtol=1e-5, atol=1e-8)
    np.testing.assert_array_equal(J[..., 2, :], np.broadcast_to([0.0, 0.0, 1.0], (20, 3)))
    np.testing.assert_allclose(J[..., 0, 1], J[..., 1, 1])


def test_weight_integrals_closed_matches_quadrature() -> None:
    rho, _, S = _states(20)
    F = np.asarray(F_of(rho, S, PARAMS, method="closed"))
    eps = 0.5 * float(F.min())
    closed = weight_integrals(F, S, eps, PARAMS, method="closed")
    quad = weight_integrals(F, S, eps, PARAMS, method="quadrature")
    for q, c in zip(quad, closed):
        np.testing.assert_allclose(q, c, rtol=1e-8, atol=1e-8)


def test_weights_and_partials() -> None:
    rho, u, S = _states(8)
    triple = to_riemann_non(rho, u, S, PARAMS)
    w, z, S = triple.arrays()
    eps = 0.25 * float(np.min(z - w))
    ws = weights_h_g_L_M(triple, PARAMS, eps, method="closed")
    quad = weights_h_g_L_M(triple, PARAMS, eps)
    np.testing.assert_allclose(quad.h, ws.h, rtol=1e-7, atol=1e-8)
    assert all(np.all(np.isfinite(v)) for v in (ws.h, ws.g, ws.L, ws.M))

    partials = weight_partials(triple, PARAMS, eps)
    dw_h = richardson_difference(
        lambda x: weights_h_g_L_M(RiemannTriple(x, z, S), PARAMS, eps, method="closed").h, w, 1e-3 * (z - w)
    )
    np.testing.assert_allclose(partials["dw_h"], dw_h, rtol=1e-5, atol=1e-6)


def test_weights_reject_vacuum() -> None:
    triple = RiemannTriple(np.array([0.0]), np.array([0.2]), np.array([0.0]))
    with pytest.raises(SingularWeightError):
        weights_h_g_L_M(triple, PARAMS, 0.0)
    with pytest.raises(SingularWeightError):
        weights_h_g_L_M(RiemannTriple(np.array([0.1]), np.array([0.1]), np.array([0.0])), PARAMS, 0.01)


def test_conserved_along_flow() -> None:
    out = conserved_along_flow(np.array([2.0]), np.array([4.0]), np.array([3.0]), np.array([2.0]))
    assert out.theta1[0] == pytest.approx(0.5)
    assert out.theta2[0] == pytest.approx((3.0 - 0.5 * 2.0) / 16.0)


def test_gradient_state_without_entropy_gradient() -> None:
    rho, u, S = _states(6)
    triple = to_riemann_non(rho, u, S, PARAMS)
    w, z, _ = triple.arrays()
    eps = 0.25 * float(np.min(z - w))
    ws = weights_h_g_L_M(triple, PARAMS, eps, method="closed")
    alpha = np.linspace(-1.0, 1.0, 6)
    beta = np.linspace(2.0, -2.0, 6)
    g = gradient_state_non(triple, alpha, beta, np.zeros(6), eps, PARAMS, weights=ws)
    np.testing.assert_allclose(g.r, np.exp(ws.h) * alpha)
    np.testing.assert_allclose(g.q, np.exp(ws.g) * beta)
    np.testing.assert_array_equal(g.alpha_t, alpha)
