"""Coefficient families, entropy bounds and compression thresholds of the full system.

Along a 3-characteristic r obeys dr = -k_r r^2 + a3 r + a4 and along a
2-characteristic q obeys dq = -k_q q^2 + b3 q + b4, with k_r = e^{-h} dw_lambda3 and
k_q = e^{-g} dz_lambda2. Every directional derivative inside the coefficients is
reduced to algebra through the transport laws of S, w, z and the two quantities
theta1, theta2 that are constant along particle paths.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .differencing import total_variation
from .eos import GasParams, derivatives_from_rest_mass, rest_mass_density, state_from_rest_mass
from .errors import InvalidInputError, NumericalError
from .nonisentropic import (
    ConservedAlongFlow,
    RiemannFrame,
    RiemannTriple,
    WeightSet,
    a_closed,
    gap_rate,
    lemma48_derivatives,
    riemann_frame,
    root_lambda,
    sonic_half_gap,
    weight_partials,
    weights_h_g_L_M,
)
from .quadrature import composite_gauss_legendre

COEFFICIENT_CHUNK = 1024
SINGULAR_RATIO = 1e-10
GRID_CHANGE = 1e-2


@dataclass(frozen=True)
class CoefficientSet:
    """a0..a4, b0..b4 and the Riccati weights k_r, k_q at a batch of states."""
    a0: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    a4: np.ndarray
    b0: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray
    b4: np.ndarray
    k_r: np.ndarray
    k_q: np.ndarray
    singular: np.ndarray

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass(frozen=True)
class EntropyBounds:
    """psi, its inverse, Psi and the constants K and E for one entropy range."""
    psi: Callable[[float], float]
    psi_inv: Callable[[float], float]
    Psi: Callable[[float], float]
    K: float
    E: float
    certificate: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class CriteriaConstants:
    K: float
    V: float
    U1: float
    U2: float
    max_w: float
    max_z: float
    M2: float
    E: float
    tv: float
    eps: float
    assumption_value: float
    assumption_margin: float
    N1: Optional[float] = None
    N2: Optional[float] = None

    @property
    def assumption_holds(self) -> bool:
        return self.assumption_margin > 0.0

    def as_dict(self) -> Dict[str, Any]:
        out = {name: getattr(self, name) for name in self.__dataclass_fields__}
        out["assumption_holds"] = self.assumption_holds
        return out


@dataclass(frozen=True)
class ThresholdReport:
    N1: float
    N2: float
    certificate: Dict[str, Any]


@dataclass(frozen=True)
class OdeRhs:
    rhs: np.ndarray
    comparison: np.ndarray
    k: np.ndarray
    N_local: np.ndarray


@dataclass(frozen=True)
class DensityBoundReport:
    applicable: bool
    exponent: Optional[float] = None
    inf_product: Optional[float] = None
    D: Optional[float] = None
    log_slope: Optional[float] = None
    bounded: Optional[bool] = None
    reason: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class CoefficientInputs:
    """Everything the coefficients need that does not depend on theta1, theta2."""
    frame: RiemannFrame
    weights: WeightSet
    derivatives: Dict[str, Dict[str, np.ndarray]]
    partials: Dict[str, np.ndarray]


def coefficient_inputs(triple: RiemannTriple, params: GasParams, eps: float) -> CoefficientInputs:
    w, z, S = triple.arrays()
    base = RiemannTriple(w, z, S)
    return CoefficientInputs(
        frame=riemann_frame(w, z, S, params),
        weights=weights_h_g_L_M(base, params, eps, method="closed"),
        derivatives=lemma48_derivatives(base, params),
        partials=weight_partials(base, params, eps),
    )


def coefficients_a_b(
    triple: RiemannTriple,
    conserved: ConservedAlongFlow,
    params: GasParams,
    eps: float,
    eta: Optional[np.ndarray] = None,
    n_t: Optional[np.ndarray] = None,
    inputs: Optional[CoefficientInputs] = None,
) -> CoefficientSet:
    """All ten coefficients; eta and n_t default to theta1 n_t and the state's n_t."""
    inputs = inputs or coefficient_inputs(triple, params, eps)
    f, ws, d, wp = inputs.frame, inputs.weights, inputs.derivatives, inputs.partials
    w, z = f.w, f.z

    theta1 = np.broadcast_to(np.asarray(conserved.theta1, dtype=float), w.shape)
    theta2 = np.broadcast_to(np.asarray(conserved.theta2, dtype=float), w.shape)
    nt = f.n_t if n_t is None else np.asarray(n_t, dtype=float)
    eta = theta1 * nt if eta is None else np.asarray(eta, dtype=float)

    a = d["a"]["value"]
    aw, az = d["a"]["dw"], d["a"]["dz"]
    l1, l2, l3 = f.lam1, f.lam2, f.lam3
    d2, d3 = d["lambda2"], d["lambda3"]
    nw, nz, nS = d["n_t"]["dw"], d["n_t"]["dz"], d["n_t"]["dS"]
    L, M = ws.L, ws.M
    eh, eg = np.exp(ws.h), np.exp(ws.g)

    d3S = (l3 - l1) * eta
    d2S = (l2 - l1) * eta
    d3w = a * d3S
    d2z = -a * d2S
    d3eta = (l3 - l1) * theta2 * nt ** 2
    d2eta = (l2 - l1) * theta2 * nt ** 2

    singular = (np.abs(nz) * (z - w) <= SINGULAR_RATIO * nt) | (np.abs(nw) * (z - w) <= SINGULAR_RATIO * nt)
    with np.errstate(divide="ignore", invalid="ignore"):
        a0 = eh * (
            d3S * (a * wp["dw_h"] + wp["dS_h"])
            - d3["dz"] * a * d2S / (l3 - l2)
            - eta * (a * d3["dw"] + d3["dS"])
            - eta * aw * (l1 - l3)
        )
        a1 = eh * eta * az * ((l1 - l2) / (l3 - l2)) * (
            (nw / nz) * d3w + (nS / nz) * d3S - a * d2S - eta * a * (l3 - l2)
        )
        a2 = nt * eta * (
            (nw / nz) * d3w * wp["dz_L"] + (nS / nz) * d3S * wp["dz_L"] - d3w * wp["dw_L"] - wp["dS_L"] * d3S
        ) - L * nt * d3eta
        k_r = np.exp(-ws.h) * d3["dw"]
        a3 = np.exp(-ws.h) * (a0 - 2.0 * d3["dw"] * L * nt * eta)
        a4 = np.exp(-ws.h) * L * nt * eta * a0 + a1 + a2 - k_r * (L * nt * eta) ** 2

        b0 = eg * (
            d2S * (wp["dS_g"] - a * wp["dz_g"])
            + d2["dw"] * a * d3S / (l2 - l3)
            + eta * (a * d2["dz"] - d2["dS"])
            + eta * az * (l1 - l2)
        )
        b1 = eg * eta * aw * ((l1 - l3) / (l2 - l3)) * (
            -(nz / nw) * d2z - (nS / nw) * d2S - a * d3S - a * eta * (l2 - l3)
        )
        b2 = nt * eta * (
            (nz / nw) * d2z * wp["dw_M"] + (nS / nw) * d2S * wp["dw_M"] - d2z * wp["dz_M"] - wp["dS_M"] * d2S
        ) - M * nt * d2eta
        k_q = np.exp(-ws.g) * d2["dz"]
        b3 = np.exp(-ws.g) * (b0 - 2.0 * d2["dz"] * M * nt * eta)
        b4 = np.exp(-ws.g) * M * nt * eta * b0 + b1 + b2 - k_q * (M * nt * eta) ** 2

    values = (a0, a1, a2, a3, a4, b0, b1, b2, b3, b4)
    singular = singular | ~np.all([np.isfinite(v) for v in values], axis=0)
    return CoefficientSet(*values, k_r=k_r, k_q=k_q, singular=singular)


def local_threshold(k: np.ndarray, c3: np.ndarray, c4: np.ndarray) -> np.ndarray:
    """N with -k v^2 + c3 v + c4 <= -k (v^2 - N^2)/2 for every v."""
    return np.sqrt(2.0 / k * (c3 ** 2 / (2.0 * k) + np.abs(c4)))


def decoupled_ode_rhs(
    value: np.ndarray,
    triple: RiemannTriple,
    conserved: ConservedAlongFlow,
    params: GasParams,
    eps: float,
    family: str = "r",
    N: Optional[float] = None,
    eta: Optional[np.ndarray] = None,
    n_t: Optional[np.ndarray] = None,
) -> OdeRhs:
    """Quadratic right-hand side of the r (3-family) or q (2-family) equation and its comparison form."""
    if family not in ("r", "q"):
        raise InvalidInputError("family must be 'r' or 'q'")
    co = coefficients_a_b(triple, conserved, params, eps, eta=eta, n_t=n_t)
    v = np.asarray(value, dtype=float)
    if family == "r":
        k, c3, c4 = co.k_r, co.a3, co.a4
    else:
        k, c3, c4 = co.k_q, co.b3, co.b4
    N_local = local_threshold(k, c3, c4)
    bound = N_local if N is None else np.maximum(N, N_local)
    return OdeRhs(
        rhs=-k * v ** 2 + c3 * v + c4,
        comparison=-0.5 * k * (v ** 2 - bound ** 2),
        k=k,
        N_local=N_local,
    )


def _threshold_squares(
    w: np.ndarray, z: np.ndarray, S: np.ndarray, params: GasParams, eps: float, T1: float, T2: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sup over |theta1| <= T1, |theta2| <= T2 of the local N^2 for both families.

    a3 and b3 are linear in theta1; a4 and b4 are theta1^2 X + theta2 Y, so the
    supremum is attained at the corners and has a closed form.
    """
    N1_sq = np.zeros_like(w)
    N2_sq = np.zeros_like(w)
    excluded = np.zeros(w.shape, dtype=bool)
    for start in range(0, w.size, COEFFICIENT_CHUNK):
        sl = slice(start, start + COEFFICIENT_CHUNK)
        triple = RiemannTriple(w[sl], z[sl], S[sl])
        ones, zeros = np.ones_like(w[sl]), np.zeros_like(w[sl])
        inputs = coefficient_inputs(triple, params, eps)
        first = coefficients_a_b(triple, ConservedAlongFlow(ones, zeros), params, eps, inputs=inputs)
        second = coefficients_a_b(triple, ConservedAlongFlow(zeros, ones), params, eps, inputs=inputs)
        for target, k, A, X, Y in (
            (N1_sq, first.k_r, first.a3, first.a4, second.a4),
            (N2_sq, first.k_q, first.b3, first.b4, second.b4),
        ):
            target[sl] = 2.0 / k * (T1 ** 2 * A ** 2 / (2.0 * k) + T1 ** 2 * np.abs(X) + T2 * np.abs(Y))
        excluded[sl] = first.singular | second.singular
    N1_sq[excluded] = 0.0
    N2_sq[excluded] = 0.0
    return N1_sq, N2_sq, excluded


def _box_admissible(w: np.ndarray, z: np.ndarray, gap_min: float, params: GasParams) -> np.ndarray:
    F = 0.5 * (z - w)
    return (z - w >= gap_min) & (F < sonic_half_gap(params))


def _box_states(
    params: GasParams, max_w: float, max_z: float, gap_min: float, grid_points: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    axes = (
        np.linspace(-max_w, max_w, grid_points),
        np.linspace(-max_z, max_z, grid_points),
        np.linspace(-params.B, params.B, grid_points if params.B > 0.0 else 1),
    )
    W, Z, S = (a.ravel() for a in np.meshgrid(*axes, indexing="ij"))
    keep = _box_admissible(W, Z, gap_min, params)
    if not np.any(keep):
        raise InvalidInputError("the threshold box holds no admissible non-vacuum state")
    return W[keep], Z[keep], S[keep]


def thresholds_N1_N2(
    params: GasParams,
    max_w: float,
    max_z: float,
    conserved_bounds: Tuple[float, float],
    eps: float,
    grid_points: int = 33,
    gap_floor_fraction: float = 0.5,
    refine: bool = True,
    max_starts: int = 5,
) -> ThresholdReport:
    """Suprema N1, N2 over the box |w| <= max_w, |z| <= max_z, |S| <= B and the theta bounds.

    The box is sampled with `grid_points` per axis and again with the intervals
    halved; the certificate is converged when the two grids, and the polish, agree to GRID_CHANGE.
    With `refine` the doubled grid's best states seed a Nelder-Mead polish.
    """
    if not eps > 0.0:
        raise InvalidInputError("eps must be positive; the initial data touch vacuum")
    if max_w < 0.0 or max_z < 0.0:
        raise InvalidInputError("box bounds must be non-negative")
    T1, T2 = (abs(float(v)) for v in conserved_bounds)
    gap_min = 2.0 * gap_floor_fraction * eps
    doubled_points = 2 * grid_points - 1
    certificate: Dict[str, Any] = {
        "grid_points": grid_points,
        "doubled_grid_points": doubled_points,
        "gap_min": gap_min,
        "theta_bounds": [T1, T2],
    }

    W, Z, S = _box_states(params, max_w, max_z, gap_min, grid_points)
    certificate["grid_states"] = int(W.size)

    if T1 == 0.0 and T2 == 0.0:
        certificate.update({"grid": [0.0, 0.0], "doubled": [0.0, 0.0], "grid_change": [0.0, 0.0],
                            "refined": [0.0, 0.0], "relative_change": [0.0, 0.0], "converged": True, "excluded": 0})
        return ThresholdReport(0.0, 0.0, certificate)

    N1_sq, N2_sq, _ = _threshold_squares(W, Z, S, params, eps, T1, T2)
    grid = [float(np.sqrt(N1_sq.max())), float(np.sqrt(N2_sq.max()))]

    W, Z, S = _box_states(params, max_w, max_z, gap_min, doubled_points)
    N1_sq, N2_sq, excluded = _threshold_squares(W, Z, S, params, eps, T1, T2)
    certificate["doubled_grid_states"] = int(W.size)
    certificate["excluded"] = int(np.count_nonzero(excluded))
    doubled = [float(np.sqrt(N1_sq.max())), float(np.sqrt(N2_sq.max()))]
    refined = list(doubled)

    if refine:
        bounds = [(-max_w, max_w), (-max_z, max_z), (-params.B, params.B)]
        for index, values in enumerate((N1_sq, N2_sq)):
            top = max(1, int(np.ceil(0.01 * values.size)))
            starts = np.argsort(values)[::-1][: min(top, max_starts)]
            best = values.max()

            def objective(x: np.ndarray, index: int = index) -> float:
                w, z, s = (np.array([v]) for v in x)
                if not _box_admissible(w, z, gap_min, params)[0]:
                    return 0.0
                sq = _threshold_squares(w, z, s, params, eps, T1, T2)
                return 0.0 if sq[2][0] else -float(sq[index][0])

            for i in starts:
                result = minimize(
                    objective, np.array([W[i], Z[i], S[i]]), method="Nelder-Mead", bounds=bounds,
                    options={"maxiter": 60, "xatol": 1e-6, "fatol": 1e-10},
                )
                best = max(best, -float(result.fun))
            refined[index] = float(np.sqrt(best))

    grid_change = [abs(d - g) / d if d > 0.0 else 0.0 for d, g in zip(doubled, grid)]
    change = [abs(r - d) / r if r > 0.0 else 0.0 for r, d in zip(refined, doubled)]
    certificate.update({
        "grid": grid,
        "doubled": doubled,
        "grid_change": grid_change,
        "refined": refined,
        "relative_change": change,
        "converged": all(ch < GRID_CHANGE for ch in grid_change + change),
    })
    return ThresholdReport(refined[0], refined[1], certificate)


def _inf_dF_drho(sigma: np.ndarray, S_lo: float, S_hi: float, params: GasParams, samples: int = 17) -> np.ndarray:
    """inf over S in [S_lo, S_hi] of dF/drho at each density."""
    c2 = params.c ** 2

    def dF(sig: np.ndarray, s: np.ndarray) -> np.ndarray:
        n = rest_mass_density(sig, s, params)
        _, P = state_from_rest_mass(n, s, params)
        d = derivatives_from_rest_mass(n, s, params)
        return c2 * np.sqrt(d.dP_drho) / (c2 * sig + P)

    if S_hi <= S_lo:
        return dF(sigma, np.full_like(sigma, S_lo))
    S_grid = np.linspace(S_lo, S_hi, samples)
    values = dF(sigma[..., None] * np.ones(samples), np.broadcast_to(S_grid, sigma.shape + (samples,)))
    out = values.min(axis=-1)
    interior = np.argmin(values, axis=-1)
    for idx in zip(*np.nonzero((interior > 0) & (interior < samples - 1))):
        sig = float(sigma[idx])
        res = minimize_scalar(
            lambda s: float(dF(np.array(sig), np.array(s))), bounds=(S_lo, S_hi), method="bounded",
            options={"xatol": 1e-10},
        )
        out[idx] = min(out[idx], float(res.fun))
    return out


def _psi_factory(params: GasParams, S_lo: float, S_hi: float, panels: int = 32, nodes: int = 16) -> Callable[[float], float]:
    p = 2.0 / (params.gamma - 1.0)

    def psi(rho: float) -> float:
        if rho < 0.0:
            raise InvalidInputError("psi needs rho >= 0")
        if rho == 0.0:
            return 0.0

        def in_tau(tau: np.ndarray) -> np.ndarray:
            sigma = tau ** p
            return _inf_dF_drho(sigma, S_lo, S_hi, params) * p * tau ** (p - 1.0)

        return float(composite_gauss_legendre(in_tau, 0.0, rho ** (1.0 / p), nodes, panels))

    return psi


def _monotone_inverse(fun: Callable[[float], float]) -> Callable[[float], float]:
    def inverse(value: float) -> float:
        if value < 0.0:
            raise InvalidInputError("inverse needs a non-negative value")
        if value == 0.0:
            return 0.0
        hi = 1.0
        for _ in range(400):
            if fun(hi) >= value:
                break
            hi *= 2.0
        else:
            raise NumericalError("could not bracket the inverse", {"value": value})
        return float(brentq(lambda r: fun(r) - value, 0.0, hi, xtol=1e-14, rtol=1e-12))

    return inverse


def _sonic_density(S: float, params: GasParams) -> float:
    F = sonic_half_gap(params)
    m = np.sinh(gap_rate(params) * F) ** 2 / params.gamma
    n = (params.c ** 2 * m / np.exp(S / params.Cv)) ** (1.0 / (params.gamma - 1.0))
    return float(n * (1.0 + m))


def sonic_density_cap(params: GasParams, S_lo: float, S_hi: float) -> float:
    """E = sup{rho : sqrt(dP/drho) < c, S in range}; infinite for gamma <= 2."""
    if params.gamma <= 2.0:
        return float("inf")
    c2 = params.c ** 2
    best = 0.0
    for S in (S_lo, S_hi):
        def gap(rho: float, S: float = S) -> float:
            d = derivatives_from_rest_mass(rest_mass_density(rho, S, params), S, params)
            return float(d.dP_drho) - c2

        hi = max(1.0, _sonic_density(S, params))
        while gap(hi) < 0.0:
            hi *= 2.0
        best = max(best, brentq(gap, 0.0, hi, xtol=1e-14, rtol=1e-13))
    return float(best)


def _grid_sup(
    ratio: Callable[[np.ndarray, np.ndarray], np.ndarray],
    rho_hi: float,
    S_lo: float,
    S_hi: float,
    samples: int,
) -> Tuple[float, float]:
    """Sup of ratio(rho, S) over (0, rho_hi] x [S_lo, S_hi], log-spaced in rho; returns (refined, coarse)."""
    log_rho = np.linspace(np.log(rho_hi) - 28.0, np.log(rho_hi), samples)
    S_axis = np.linspace(S_lo, S_hi, max(3, samples // 4)) if S_hi > S_lo else np.array([S_lo])
    LR, SS = np.meshgrid(log_rho, S_axis, indexing="ij")
    values = ratio(np.exp(LR), SS)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    coarse = float(values[i, j])
    lo = log_rho[max(i - 1, 0)]
    hi = log_rho[min(i + 1, samples - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda lr: -float(ratio(np.array(np.exp(lr)), np.array(SS[i, j]))), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-10},
        )
        return max(coarse, -float(res.fun)), coarse
    return coarse, coarse


def psi_Psi_K(
    params: GasParams,
    entropy_range: Optional[Tuple[float, float]] = None,
    samples: int = 257,
    rho_max: float = 1e6,
) -> EntropyBounds:
    """psi (inf-over-S integral of dF/drho), Psi(kappa), K and E for S in the entropy range (default [-B, B])."""
    S_lo, S_hi = entropy_range if entropy_range is not None else (-params.B, params.B)
    E = sonic_density_cap(params, S_lo, S_hi)

    def fields(rho: np.ndarray, S: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = rest_mass_density(rho, S, params)
        m = np.asarray(n, dtype=float) ** (params.gamma - 1.0) * np.exp(S / params.Cv) / params.c ** 2
        F = np.arcsinh(np.sqrt(params.gamma * m)) / gap_rate(params)
        return F, m, root_lambda(F, params)

    def a_ratio(rho: np.ndarray, S: np.ndarray) -> np.ndarray:
        F, m, _ = fields(rho, S)
        return np.abs(a_closed(m, params)) / (2.0 * F)

    def Psi_ratio(rho: np.ndarray, S: np.ndarray) -> np.ndarray:
        F, _, root = fields(rho, S)
        return root / F

    K_hi = E * (1.0 - 1e-12) if np.isfinite(E) else rho_max
    K, K_coarse = _grid_sup(a_ratio, K_hi, S_lo, S_hi, samples)
    K_half, _ = _grid_sup(a_ratio, K_hi, S_lo, S_hi, (samples + 1) // 2)

    def Psi(kappa: float) -> float:
        if kappa <= 0.0:
            raise InvalidInputError("Psi needs kappa > 0")
        return _grid_sup(Psi_ratio, kappa, S_lo, S_hi, samples)[0]

    psi = _psi_factory(params, S_lo, S_hi)
    return EntropyBounds(
        psi=psi,
        psi_inv=_monotone_inverse(psi),
        Psi=Psi,
        K=K,
        E=E,
        certificate={
            "K_coarse": K_coarse,
            "K_half_grid": K_half,
            "K_relative_change": abs(K - K_half) / K if K > 0.0 else 0.0,
            "samples": samples,
        },
    )


def constants_226(
    w0: np.ndarray,
    z0: np.ndarray,
    S0: np.ndarray,
    params: GasParams,
    bounds: Optional[EntropyBounds] = None,
    periodic: bool = False,
) -> CriteriaConstants:
    """Box constants from sampled initial Riemann variables and entropy."""
    w0, z0, S0 = (np.asarray(v, dtype=float) for v in (w0, z0, S0))
    if w0.shape != z0.shape or w0.shape != S0.shape or w0.size < 2:
        raise InvalidInputError("initial profiles must share one shape with at least two samples")
    bounds = bounds or psi_Psi_K(params)
    tv = total_variation(S0) + (abs(float(S0[0] - S0[-1])) if periodic else 0.0)
    K = bounds.K
    V = float(np.exp(K * tv))
    sup_w, sup_z = float(np.max(np.abs(w0))), float(np.max(np.abs(z0)))
    U1 = sup_w * V + K * V ** 2 * sup_z * tv
    U2 = sup_z * V + K * V ** 2 * sup_w * tv
    spread = (K * V * tv) ** 2
    growth = spread * np.exp(spread)
    max_w = U1 + growth * U1
    max_z = U2 + growth * U2
    half = 0.5 * (max_z + max_w)
    M2 = bounds.psi_inv(half) if half > 0.0 else 0.0
    value = bounds.Psi(M2) * half if M2 > 0.0 else 0.0
    return CriteriaConstants(
        K=K, V=V, U1=U1, U2=U2, max_w=float(max_w), max_z=float(max_z), M2=float(M2), E=bounds.E,
        tv=tv, eps=0.5 * float(np.min(z0 - w0)),
        assumption_value=float(value), assumption_margin=float(params.c - value),
    )


def density_lower_bound_check(
    histories: Sequence[Tuple[np.ndarray, np.ndarray]], params: GasParams, decay_ratio: float = 1e-2
) -> DensityBoundReport:
    """inf over time of rho^((3-gamma)/4) (t+1) along the given (t, rho) histories."""
    if not 1.0 < params.gamma < 3.0:
        return DensityBoundReport(applicable=False, reason="gamma outside (1, 3)")
    if not histories:
        raise InvalidInputError("at least one (t, rho) history is required")
    exponent = (3.0 - params.gamma) / 4.0
    inf_product = np.inf
    slopes = []
    decaying = False
    for t, rho in histories:
        t, rho = np.asarray(t, dtype=float), np.asarray(rho, dtype=float)
        product = np.clip(rho, 0.0, None) ** exponent * (t + 1.0)
        inf_product = min(inf_product, float(product.min()))
        if t.size >= 3 and np.all(product > 0.0):
            slopes.append(float(np.polyfit(np.log(t + 1.0), np.log(product), 1)[0]))
        if t.size >= 2 and np.all(np.diff(product) < 0.0) and product[-1] < decay_ratio * product[0]:
            decaying = True
    bounded = inf_product > 0.0 and not decaying
    return DensityBoundReport(
        applicable=True,
        exponent=exponent,
        inf_product=inf_product,
        D=1.0 / inf_product if inf_product > 0.0 else float("inf"),
        log_slope=min(slopes) if slopes else None,
        bounded=bounded,
    )
