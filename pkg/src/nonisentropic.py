"""Riemann variables, weights and first-order calculus of the full 3x3 system.

The coordinates are (w, z, S) with w + z = 2c artanh(u/c) and z - w = 2F(rho, S).
For the polytropic law every quantity below is explicit in the specific internal
energy m = n^(gamma-1) exp(S/Cv) / c^2:

    F = arsinh(sqrt(gamma m)) / k,  sqrt(dP/drho) = c sqrt(gamma-1) tanh(k F),
    k = sqrt(gamma-1) / (2c).

The explicit forms are the default route. The quadrature definitions are kept
behind `method=` switches and serve as oracles in `verify`.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .differencing import richardson_difference
from .eos import (
    EosDerivatives,
    GasParams,
    derivatives_from_rest_mass,
    energy_ratio,
    rest_mass_density,
    sound_speed,
    state_from_rest_mass,
)
from .errors import AdmissibilityError, DomainError, InvalidInputError, NumericalError, SingularWeightError
from .quadrature import DEFAULT_NODES, composite_gauss_legendre, sqrt_endpoint_rule, vacuum_regularized_integral

ArrayLike = Union[float, np.ndarray]

FD_RELATIVE = 1e-3
FD_ENTROPY = 1e-3
_S_SLACK = 1e-12


@dataclass(frozen=True)
class RiemannTriple:
    """(w, z, S); the entropy coordinate is S itself."""
    w: ArrayLike
    z: ArrayLike
    S: ArrayLike

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        w, z, S = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (self.w, self.z, self.S)))
        return np.array(w), np.array(z), np.array(S)


@dataclass(frozen=True)
class GradientStateNon:
    alpha: np.ndarray
    beta: np.ndarray
    eta: np.ndarray
    alpha_t: np.ndarray
    beta_t: np.ndarray
    n_t: np.ndarray
    r: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class ConservedAlongFlow:
    """eta/n_t and (S_xx - (eta/n_t) n_t_x)/n_t^2, both transported by u."""
    theta1: np.ndarray
    theta2: np.ndarray


@dataclass(frozen=True)
class WeightSet:
    h: np.ndarray
    g: np.ndarray
    L: np.ndarray
    M: np.ndarray


@dataclass(frozen=True)
class RiemannFrame:
    """Primitive state and first-order quantities at a batch of (w, z, S) points."""
    w: np.ndarray
    z: np.ndarray
    S: np.ndarray
    F: np.ndarray
    rho: np.ndarray
    n: np.ndarray
    m: np.ndarray
    u: np.ndarray
    P: np.ndarray
    root_lambda: np.ndarray
    H: np.ndarray
    G: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    lam3: np.ndarray
    gap21: np.ndarray
    gap13: np.ndarray
    n_t: np.ndarray
    eos: EosDerivatives
    dF_drho: np.ndarray
    dF_dS: np.ndarray


def _inputs(*values: ArrayLike) -> Tuple[bool, Tuple[np.ndarray, ...]]:
    scalar = all(np.ndim(v) == 0 for v in values)
    arrays = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in values])
    return scalar, tuple(np.array(a, dtype=float) for a in arrays)


def _out(value: np.ndarray, scalar: bool) -> ArrayLike:
    return float(value) if scalar else value


def gap_rate(params: GasParams) -> float:
    """k = sqrt(gamma-1)/(2c)."""
    return np.sqrt(params.gamma - 1.0) / (2.0 * params.c)


def sonic_half_gap(params: GasParams) -> float:
    """Half gap F at which sqrt(dP/drho) reaches c; infinite for gamma <= 2."""
    if params.gamma <= 2.0:
        return float("inf")
    return float(np.arctanh(1.0 / np.sqrt(params.gamma - 1.0)) / gap_rate(params))


def root_lambda(F: ArrayLike, params: GasParams) -> np.ndarray:
    """sqrt(dP/drho) as a function of the half gap alone."""
    return params.c * np.sqrt(params.gamma - 1.0) * np.tanh(gap_rate(params) * np.asarray(F, dtype=float))


def n_tilde(n: ArrayLike, u: ArrayLike, params: GasParams) -> np.ndarray:
    """Lorentz-weighted rest-mass density c n / sqrt(c^2 - u^2)."""
    u = np.asarray(u, dtype=float)
    return params.c * np.asarray(n, dtype=float) / np.sqrt(params.c ** 2 - u * u)


def _check_entropy(S: np.ndarray, params: GasParams) -> None:
    if np.any(np.abs(S) > params.B + _S_SLACK * max(1.0, params.B)):
        raise AdmissibilityError(f"|S| exceeds B = {params.B}")


def _F_integrand(S: float, params: GasParams) -> Callable[[float], float]:
    c2 = params.c ** 2

    def integrand(sigma: float) -> float:
        n = rest_mass_density(sigma, S, params)
        _, P = state_from_rest_mass(n, S, params)
        d = derivatives_from_rest_mass(n, S, params)
        return float(c2 * np.sqrt(d.dP_drho) / (c2 * sigma + P))

    return integrand


def F_of(rho: ArrayLike, S: ArrayLike, params: GasParams, method: str = "quadrature") -> ArrayLike:
    """Half invariant gap F(rho, S) = int_0^rho c^2 sqrt(dP/dsigma) / (c^2 sigma + P) dsigma."""
    scalar, (r, s) = _inputs(rho, S)
    if np.any(r < 0.0) or np.any(np.isnan(r)):
        raise DomainError("density must be non-negative")
    if method == "closed":
        m = energy_ratio(rest_mass_density(r, s, params), s, params)
        out = np.arcsinh(np.sqrt(params.gamma * m)) / gap_rate(params)
    elif method == "quadrature":
        out = np.array(
            [vacuum_regularized_integral(_F_integrand(si, params), ri, params.gamma) for ri, si in zip(r.ravel(), s.ravel())]
        ).reshape(r.shape)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    return _out(out, scalar)


def _closed_inverse(F: np.ndarray, S: np.ndarray, params: GasParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    gamma = params.gamma
    m = np.sinh(gap_rate(params) * F) ** 2 / gamma
    kappa = np.exp(S / params.Cv)
    n = (params.c ** 2 * m / kappa) ** (1.0 / (gamma - 1.0))
    return n * (1.0 + m), n, m


def _bracketed_density(F: float, S: float, params: GasParams) -> float:
    if F == 0.0:
        return 0.0

    def residual(r: float) -> float:
        return F_of(r, S, params, method="quadrature") - F

    hi = 1.0
    for _ in range(200):
        if residual(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise NumericalError("could not bracket the density", {"F": F, "S": S})
    return float(brentq(residual, 0.0, hi, xtol=1e-15, rtol=1e-13, maxiter=400))


def density_from_gap(F: ArrayLike, S: ArrayLike, params: GasParams, method: str = "closed") -> ArrayLike:
    """Inverse of F(., S): the density with half gap F."""
    scalar, (f, s) = _inputs(F, S)
    if np.any(f < 0.0):
        raise AdmissibilityError("z - w must be non-negative")
    if method == "closed":
        rho = _closed_inverse(f, s, params)[0]
    elif method == "bracket":
        rho = np.array([_bracketed_density(fi, si, params) for fi, si in zip(f.ravel(), s.ravel())]).reshape(f.shape)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    return _out(rho, scalar)


def _sound_speed_checked(rho: np.ndarray, u: np.ndarray, S: np.ndarray, params: GasParams) -> np.ndarray:
    if np.any(rho < 0.0):
        raise DomainError("density must be non-negative")
    if np.any(np.abs(u) >= params.c):
        raise DomainError("|u| must be below c")
    cs = np.asarray(sound_speed(rho, S, params))
    if np.any(cs >= params.c):
        raise AdmissibilityError("sound speed reaches c")
    return cs


def to_riemann_non(rho: ArrayLike, u: ArrayLike, S: ArrayLike, params: GasParams, method: str = "closed") -> RiemannTriple:
    scalar, (r, v, s) = _inputs(rho, u, S)
    _sound_speed_checked(r, v, s, params)
    _check_entropy(s, params)
    half_sum = params.c * np.arctanh(v / params.c)
    F = np.asarray(F_of(r, s, params, method="closed" if method == "closed" else "quadrature"))
    return RiemannTriple(_out(half_sum - F, scalar), _out(half_sum + F, scalar), _out(s, scalar))


def from_riemann_non(triple: RiemannTriple, params: GasParams, method: str = "closed") -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    scalar = all(np.ndim(v) == 0 for v in (triple.w, triple.z, triple.S))
    w, z, S = triple.arrays()
    F = 0.5 * (z - w)
    if np.any(F < 0.0):
        raise AdmissibilityError("z - w must be non-negative")
    if np.any(F >= sonic_half_gap(params)):
        raise AdmissibilityError("z - w exceeds the sonic bound")
    _check_entropy(S, params)
    u = params.c * np.tanh((w + z) / (2.0 * params.c))
    rho = np.asarray(density_from_gap(F, S, params, method=method))
    return _out(rho, scalar), _out(u, scalar), _out(S, scalar)


def eigenvalues_non(rho: ArrayLike, u: ArrayLike, S: ArrayLike, params: GasParams) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """(lambda1, lambda2, lambda3) = (u, u (+) cs, u (-) cs) with relativistic velocity addition."""
    scalar, (r, v, s) = _inputs(rho, u, S)
    cs = _sound_speed_checked(r, v, s, params)
    c2 = params.c ** 2
    lam2 = (v + cs) / (1.0 + v * cs / c2)
    lam3 = (v - cs) / (1.0 - v * cs / c2)
    return _out(v, scalar), _out(lam2, scalar), _out(lam3, scalar)


def exponents_HG(triple: RiemannTriple, params: GasParams) -> Tuple[np.ndarray, np.ndarray]:
    """H = (w+z)/c - 2 artanh(sqrt(Lambda)/c), G = (w+z)/c + 2 artanh(sqrt(Lambda)/c)."""
    w, z, _ = triple.arrays()
    F = 0.5 * (z - w)
    if np.any(F < 0.0):
        raise AdmissibilityError("z - w must be non-negative")
    if np.any(F >= sonic_half_gap(params)):
        raise AdmissibilityError("z - w exceeds the sonic bound")
    phase = 2.0 * np.arctanh(root_lambda(F, params) / params.c)
    s = (w + z) / params.c
    return s - phase, s + phase


def eigenvalues_from_HG(H: ArrayLike, G: ArrayLike, params: GasParams) -> Tuple[np.ndarray, np.ndarray]:
    """(lambda2, lambda3) = (c(1 - 2/(e^G+1)), c(1 - 2/(e^H+1)))."""
    return params.c * np.tanh(0.5 * np.asarray(G, dtype=float)), params.c * np.tanh(0.5 * np.asarray(H, dtype=float))


def _a_integral(rho: float, S: float, params: GasParams) -> float:
    if rho == 0.0:
        return 0.0
    c2 = params.c ** 2

    def parts(sigma: float) -> Tuple[float, float, float, float]:
        n = rest_mass_density(sigma, S, params)
        _, P = state_from_rest_mass(n, S, params)
        d = derivatives_from_rest_mass(n, S, params)
        return float(P), float(d.dP_drho), float(d.dP_dS), float(d.d2P_drhodS)

    def first(sigma: float) -> float:
        P, dP, _, dPS = parts(sigma)
        return c2 * dPS / (2.0 * np.sqrt(dP) * (c2 * sigma + P))

    def second(sigma: float) -> float:
        P, dP, dPs, _ = parts(sigma)
        return c2 * np.sqrt(dP) * dPs / (c2 * sigma + P) ** 2

    P, dP, dPs, _ = parts(rho)
    boundary = c2 * dPs / ((P + rho * c2) * np.sqrt(dP))
    return (
        -vacuum_regularized_integral(first, rho, params.gamma)
        + vacuum_regularized_integral(second, rho, params.gamma)
        + boundary
    )


def _a_formula(rho: float, S: float, params: GasParams) -> float:
    if rho == 0.0:
        return 0.0
    c2 = params.c ** 2
    dF_dS = float(richardson_difference(lambda s: F_of(rho, s, params, method="quadrature"), S, FD_ENTROPY))
    n = rest_mass_density(rho, S, params)
    _, P = state_from_rest_mass(n, S, params)
    d = derivatives_from_rest_mass(n, S, params)
    dF_drho = c2 * np.sqrt(d.dP_drho) / (c2 * rho + P)
    return float(-dF_dS + d.dP_dS / d.dP_drho * dF_drho)


def a_closed(m: ArrayLike, params: GasParams) -> np.ndarray:
    """a = -(c/R) sqrt((gamma-1) m / (gamma (1 + gamma m)))."""
    m = np.asarray(m, dtype=float)
    gamma = params.gamma
    return -(params.c / params.R) * np.sqrt((gamma - 1.0) * m / (gamma * (1.0 + gamma * m)))


def a_coefficient(rho: ArrayLike, S: ArrayLike, params: GasParams, method: str = "integral") -> ArrayLike:
    """Entropy coupling a = -dF/dS + (dP/dS / dP/drho) dF/drho.

    "integral" uses the three-term quadrature representation, "formula" assembles
    the defining expression with dF/dS by Richardson differencing of F, and
    "closed" is the polytropic closed form.
    """
    scalar, (r, s) = _inputs(rho, S)
    if np.any(r < 0.0):
        raise DomainError("density must be non-negative")
    if method == "closed":
        out = a_closed(energy_ratio(rest_mass_density(r, s, params), s, params), params)
    elif method in ("integral", "formula"):
        fn = _a_integral if method == "integral" else _a_formula
        out = np.array([fn(ri, si, params) for ri, si in zip(r.ravel(), s.ravel())]).reshape(r.shape)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    return _out(out, scalar)


def riemann_frame(w: ArrayLike, z: ArrayLike, S: ArrayLike, params: GasParams) -> RiemannFrame:
    """Evaluate the state at (w, z, S) through the closed inverse."""
    _, (w, z, S) = _inputs(w, z, S)
    F = 0.5 * (z - w)
    if np.any(F < 0.0):
        raise AdmissibilityError("z - w must be non-negative")
    if np.any(F >= sonic_half_gap(params)):
        raise AdmissibilityError("z - w exceeds the sonic bound")
    c, c2, gamma = params.c, params.c ** 2, params.gamma
    rho, n, m = _closed_inverse(F, S, params)
    _, P = state_from_rest_mass(n, S, params)
    eos = derivatives_from_rest_mass(n, S, params)
    u = c * np.tanh((w + z) / (2.0 * c))
    cs = root_lambda(F, params)
    phase = 2.0 * np.arctanh(cs / c)
    s = (w + z) / c
    H, G = s - phase, s + phase
    lam2, lam3 = eigenvalues_from_HG(H, G, params)
    c2mu2 = c2 - u * u
    with np.errstate(divide="ignore", invalid="ignore"):
        dF_drho = c * np.sqrt(gamma * (gamma - 1.0) * m) / (n * (1.0 + gamma * m) ** 1.5)
    return RiemannFrame(
        w=w, z=z, S=S, F=F, rho=rho, n=n, m=m, u=u, P=P, root_lambda=cs, H=H, G=G,
        lam1=u, lam2=lam2, lam3=lam3,
        gap21=cs * c2mu2 / (c2 + u * cs),
        gap13=cs * c2mu2 / (c2 - u * cs),
        n_t=c * n / np.sqrt(c2mu2),
        eos=eos,
        dF_drho=dF_drho,
        dF_dS=rho / params.R * dF_drho,
    )


def _require_nonvacuum(frame: RiemannFrame) -> None:
    if np.any(frame.F <= 0.0):
        raise SingularWeightError("derivatives need z - w > 0")


def a_partials(frame: RiemannFrame, params: GasParams) -> Dict[str, np.ndarray]:
    """a and its partials in rho (fixed S) and in (w, z, S) at fixed Riemann variables."""
    gamma, m, n = params.gamma, frame.m, frame.n
    A0 = (params.c / params.R) * np.sqrt((gamma - 1.0) / gamma)
    one_gm = 1.0 + gamma * m
    with np.errstate(divide="ignore", invalid="ignore"):
        base = -A0 / (2.0 * np.sqrt(m) * one_gm ** 1.5)
        drho = base * (gamma - 1.0) * m / (n * one_gm)
        dz = drho / (2.0 * frame.dF_drho)
    # m depends on F alone, so a is constant in S at fixed (w, z)
    return {"value": a_closed(m, params), "drho": drho, "dw": -dz, "dz": dz, "dS": np.zeros_like(dz)}


def n_tilde_partials(frame: RiemannFrame, params: GasParams) -> Dict[str, np.ndarray]:
    c = params.c
    root = np.sqrt(c * c - frame.u ** 2)
    along = c * frame.eos.dn_drho / (2.0 * frame.dF_drho * root)
    drift = frame.n * frame.u / (2.0 * c * root)
    return {
        "value": frame.n_t,
        "dw": -along + drift,
        "dz": along + drift,
        # n = (c^2 m / kappa)^(1/(gamma-1)) with m fixed by F
        "dS": -c * frame.n / (params.R * root),
    }


def lemma48_derivatives(triple: RiemannTriple, params: GasParams) -> Dict[str, Dict[str, np.ndarray]]:
    """Closed-form partials in (w, z, S) of Lambda, H, G, the eigenvalues, a and n_t.

    The S-partials are taken at fixed (w, z). There rho moves with S along
    d rho/dS = -dF/dS / dF/drho = -rho/R, which cancels the explicit entropy
    dependence of Lambda exactly: Lambda, H, G, lambda2, lambda3 and a are
    functions of F and w + z alone and their S-partials vanish. Only n_t keeps one.
    """
    f = riemann_frame(*triple.arrays(), params)
    _require_nonvacuum(f)
    c = params.c
    Lam = f.root_lambda ** 2
    d2 = f.eos.d2P_drho2
    dw_Lam = -d2 / (2.0 * f.dF_drho)
    flat = np.zeros_like(Lam)
    T = c * d2 / (2.0 * f.root_lambda * (c * c - Lam) * f.dF_drho)
    H = {"value": f.H, "dw": 1.0 / c + T, "dz": 1.0 / c - T, "dS": flat}
    G = {"value": f.G, "dw": 1.0 / c - T, "dz": 1.0 / c + T, "dS": flat.copy()}
    s3 = 0.5 * c / np.cosh(0.5 * f.H) ** 2
    s2 = 0.5 * c / np.cosh(0.5 * f.G) ** 2
    du = (c * c - f.u ** 2) / (2.0 * c * c)
    return {
        "Lambda": {"value": Lam, "dw": dw_Lam, "dz": -dw_Lam, "dS": flat.copy()},
        "H": H,
        "G": G,
        "lambda1": {"value": f.u, "dw": du, "dz": du, "dS": np.zeros_like(du)},
        "lambda2": {"value": f.lam2, "dw": s2 * G["dw"], "dz": s2 * G["dz"], "dS": s2 * G["dS"]},
        "lambda3": {"value": f.lam3, "dw": s3 * H["dw"], "dz": s3 * H["dz"], "dS": s3 * H["dS"]},
        "a": {k: v for k, v in a_partials(f, params).items() if k != "drho"},
        "n_t": n_tilde_partials(f, params),
    }


def jacobian_phi(rho: ArrayLike, u: ArrayLike, S: ArrayLike, params: GasParams) -> np.ndarray:
    """d(w, z, S)/d(rho, u, S), shape (..., 3, 3)."""
    _, (r, v, s) = _inputs(rho, u, S)
    _sound_speed_checked(r, v, s, params)
    n = rest_mass_density(r, s, params)
    m = energy_ratio(n, s, params)
    gamma, c2 = params.gamma, params.c ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        dF_drho = params.c * np.sqrt(gamma * (gamma - 1.0) * m) / (n * (1.0 + gamma * m) ** 1.5)
    dF_dS = r / params.R * dF_drho
    du = c2 / (c2 - v * v)
    J = np.zeros(r.shape + (3, 3))
    J[..., 0, 0], J[..., 0, 1], J[..., 0, 2] = -dF_drho, du, -dF_dS
    J[..., 1, 0], J[..., 1, 1], J[..., 1, 2] = dF_drho, du, dF_dS
    J[..., 2, 2] = 1.0
    return J


def weight_integrals(
    F: ArrayLike, S: ArrayLike, eps: float, params: GasParams, method: str = "closed", nodes: int = 24, panels: int = 8
) -> Tuple[np.ndarray, np.ndarray]:
    """int_eps^F (c +- sqrt(Lambda))^2 / (2 c^2 sqrt(Lambda)) dXi for the h (+) and g (-) weights."""
    _, (F, S) = _inputs(F, S)
    c = params.c
    if method == "closed":
        k = gap_rate(params)
        common = np.log(np.sinh(k * F) / np.sinh(k * eps)) / (params.gamma - 1.0) + np.log(np.cosh(k * F) / np.cosh(k * eps))
        drift = (F - eps) / c
        return common + drift, common - drift
    if method != "quadrature":
        raise InvalidInputError(f"unknown method {method!r}")

    def integrand(sign: float) -> Callable[[np.ndarray], np.ndarray]:
        def in_log(ell: np.ndarray) -> np.ndarray:
            xi = np.exp(ell)
            s = np.broadcast_to(S[..., None], xi.shape)
            _, n, _ = _closed_inverse(xi, s, params)
            root = np.sqrt(derivatives_from_rest_mass(n, s, params).dP_drho)
            return xi * (c + sign * root) ** 2 / (2.0 * c * c * root)

        return in_log

    lo = np.full_like(F, np.log(eps))
    hi = np.log(F)
    Jh = composite_gauss_legendre(integrand(1.0), lo, hi, nodes, panels)
    Jg = composite_gauss_legendre(integrand(-1.0), lo, hi, nodes, panels)
    return Jh, Jg


def _weights_from_frame(frame: RiemannFrame, eps: float, params: GasParams, integrals: str) -> Tuple[np.ndarray, np.ndarray]:
    Jh, Jg = weight_integrals(frame.F, frame.S, eps, params, method=integrals)
    H, G = frame.H, frame.G
    h = -np.logaddexp(0.0, -H) + 0.5 * np.log(np.expm1(G - H)) - Jh
    g = -np.logaddexp(0.0, -G) + 0.5 * np.log(-np.expm1(H - G)) - Jg
    return h, g


def _omega_L(w: np.ndarray, theta: np.ndarray, S: np.ndarray, eps: float, params: GasParams) -> np.ndarray:
    f = riemann_frame(w, theta, S, params)
    h, _ = _weights_from_frame(f, eps, params, "closed")
    ratio = f.gap21 / (f.gap21 + f.gap13)
    return np.exp(h) * f.n_t * a_partials(f, params)["dz"] * ratio


def _omega_M(varsigma: np.ndarray, z: np.ndarray, S: np.ndarray, eps: float, params: GasParams) -> np.ndarray:
    f = riemann_frame(varsigma, z, S, params)
    _, g = _weights_from_frame(f, eps, params, "closed")
    ratio = -f.gap13 / (f.gap21 + f.gap13)
    return np.exp(g) * f.n_t * a_partials(f, params)["dw"] * ratio


def weights_L_M(
    w: ArrayLike, z: ArrayLike, S: ArrayLike, eps: float, params: GasParams, nodes: int = DEFAULT_NODES
) -> Tuple[np.ndarray, np.ndarray]:
    """L = -(1/n_t^2) int_w^z Omega_L(w, t, S) dt and M = -(1/n_t^2) int_z^w Omega_M(t, z, S) dt."""
    _, (w, z, S) = _inputs(w, z, S)
    n_t = riemann_frame(w, z, S, params).n_t
    int_L = sqrt_endpoint_rule(lambda t: _omega_L(w[..., None], t, S[..., None], eps, params), w, z, nodes)
    int_M = sqrt_endpoint_rule(lambda t: _omega_M(t, z[..., None], S[..., None], eps, params), z, w, nodes)
    return -int_L / n_t ** 2, -int_M / n_t ** 2


def _check_weight_domain(w: np.ndarray, z: np.ndarray, eps: float, gap_floor: float) -> None:
    if not eps > 0.0:
        raise SingularWeightError("eps must be positive; the initial data touch vacuum")
    if np.any(z - w <= 0.0) or np.any(z - w < 2.0 * gap_floor):
        raise SingularWeightError("z - w is below the admissible gap")


def weights_h_g_L_M(
    triple: RiemannTriple,
    params: GasParams,
    eps: float,
    method: str = "quadrature",
    nodes: int = DEFAULT_NODES,
    gap_floor: float = 0.0,
) -> WeightSet:
    """Weights h, g and the entropy corrections L, M.

    `method` selects how the int_eps^F pieces of h and g are evaluated
    ("quadrature" or "closed"); the inner integrands of L and M always use the
    closed form.
    """
    w, z, S = triple.arrays()
    _check_weight_domain(w, z, eps, gap_floor)
    f = riemann_frame(w, z, S, params)
    h, g = _weights_from_frame(f, eps, params, method)
    L, M = weights_L_M(w, z, S, eps, params, nodes)
    return WeightSet(h=h, g=g, L=L, M=M)


def weight_partials(
    triple: RiemannTriple, params: GasParams, eps: float, nodes: int = DEFAULT_NODES
) -> Dict[str, np.ndarray]:
    """Partials of h, g, L, M in (w, z, S).

    dw_h and dz_g are closed form; the rest are Richardson differences with steps
    1e-3 (z - w) in w and z and 1e-3 in S.
    """
    w, z, S = triple.arrays()
    _check_weight_domain(w, z, eps, 0.0)
    d = lemma48_derivatives(RiemannTriple(w, z, S), params)
    f = riemann_frame(w, z, S, params)
    H, G = f.H, f.G
    dH, dG = d["H"], d["G"]
    E = np.expm1(G - H)
    D = -np.expm1(H - G)
    c = params.c
    root = f.root_lambda
    j_h = (c + root) ** 2 / (2.0 * c * c * root)
    j_g = (c - root) ** 2 / (2.0 * c * c * root)
    dw_h = -dH["dw"] / (1.0 + np.exp(-H)) + ((E + 1.0) * (dG["dw"] + dH["dw"]) - 2.0 * dH["dw"]) / (2.0 * E) + 0.5 * j_h
    dz_g = -dG["dz"] / (1.0 + np.exp(-G)) + (2.0 * dG["dz"] - (1.0 - D) * (dG["dz"] + dH["dz"])) / (2.0 * D) - 0.5 * j_g

    hw = FD_RELATIVE * (z - w)

    def hg(wv: np.ndarray, zv: np.ndarray, Sv: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _weights_from_frame(riemann_frame(wv, zv, Sv, params), eps, params, "closed")

    def LM(wv: np.ndarray, zv: np.ndarray, Sv: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return weights_L_M(wv, zv, Sv, eps, params, nodes)

    out = {"dw_h": dw_h, "dz_g": dz_g}
    out["dS_h"] = richardson_difference(lambda s: hg(w, z, s)[0], S, FD_ENTROPY)
    out["dS_g"] = richardson_difference(lambda s: hg(w, z, s)[1], S, FD_ENTROPY)
    for index, name in ((0, "L"), (1, "M")):
        out[f"dw_{name}"] = richardson_difference(lambda x: LM(x, z, S)[index], w, hw)
        out[f"dz_{name}"] = richardson_difference(lambda x: LM(w, x, S)[index], z, hw)
        out[f"dS_{name}"] = richardson_difference(lambda s: LM(w, z, s)[index], S, FD_ENTROPY)
    return out


def conserved_along_flow(eta: ArrayLike, n_t: ArrayLike, dxx_S: ArrayLike, dx_n_t: ArrayLike) -> ConservedAlongFlow:
    eta, n_t = np.asarray(eta, dtype=float), np.asarray(n_t, dtype=float)
    theta1 = eta / n_t
    theta2 = (np.asarray(dxx_S, dtype=float) - theta1 * np.asarray(dx_n_t, dtype=float)) / n_t ** 2
    return ConservedAlongFlow(theta1=theta1, theta2=theta2)


def gradient_state_non(
    triple: RiemannTriple,
    alpha: ArrayLike,
    beta: ArrayLike,
    eta: ArrayLike,
    eps: float,
    params: GasParams,
    weights: Optional[WeightSet] = None,
) -> GradientStateNon:
    """Gradient quantities with r = e^h alpha_t - L eta n_t and q = e^g beta_t - M eta n_t."""
    w, z, S = triple.arrays()
    f = riemann_frame(w, z, S, params)
    ws = weights if weights is not None else weights_h_g_L_M(RiemannTriple(w, z, S), params, eps)
    alpha, beta, eta = (np.asarray(v, dtype=float) for v in (alpha, beta, eta))
    a = a_closed(f.m, params)
    alpha_t = alpha - a * eta
    beta_t = beta + a * eta
    return GradientStateNon(
        alpha=alpha,
        beta=beta,
        eta=eta,
        alpha_t=alpha_t,
        beta_t=beta_t,
        n_t=f.n_t,
        r=np.exp(ws.h) * alpha_t - ws.L * eta * f.n_t,
        q=np.exp(ws.g) * beta_t - ws.M * eta * f.n_t,
    )
