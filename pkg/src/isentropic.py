"""Riemann invariants, weights and Riccati quantities of the 2x2 barotropic system.

Along a 1-characteristic (speed lambda1) w is constant and xi = e^{h1} dx_w obeys
d(1/xi)/dt = e^{-h1} dw_lambda1; along a 2-characteristic z is constant and
zeta = e^{h2} dx_z obeys the mirrored law with e^{-h2} dz_lambda2.
"""
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .eos import GasParams
from .errors import AdmissibilityError, DomainError, SingularWeightError
from .quadrature import composite_trapezoid, vacuum_regularized_integral

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class RiemannPairIso:
    w: ArrayLike
    z: ArrayLike


@dataclass(frozen=True)
class GradientStateIso:
    dx_w: np.ndarray
    dx_z: np.ndarray
    xi: np.ndarray
    zeta: np.ndarray


@dataclass(frozen=True)
class RiccatiPrediction:
    """Reciprocal history 1/xi (or 1/zeta) rebuilt from the along-path coefficient."""
    t: np.ndarray
    reciprocal: np.ndarray
    coefficient: np.ndarray
    blowup_time: Optional[float]
    extrapolated: bool

    @property
    def predicted(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / self.reciprocal


def _scalar(*values: ArrayLike) -> bool:
    return all(np.ndim(v) == 0 for v in values)


def _out(value: np.ndarray, scalar: bool) -> ArrayLike:
    return float(value) if scalar else value


def gap_scale(params: GasParams) -> float:
    """4c sqrt(gamma)/(gamma-1); z - w = gap_scale * Y."""
    return 4.0 * params.c * np.sqrt(params.gamma) / (params.gamma - 1.0)


def sonic_gap(params: GasParams) -> float:
    """Largest admissible z - w; beyond it sqrt(P') >= c."""
    return gap_scale(params) * np.arctan(1.0 / np.sqrt(params.gamma))


def sound_speed_iso(rho: ArrayLike, params: GasParams) -> ArrayLike:
    rho = np.asarray(rho, dtype=float)
    return params.k * np.sqrt(params.gamma) * rho ** ((params.gamma - 1.0) / 2.0)


def to_riemann_iso(rho: ArrayLike, u: ArrayLike, params: GasParams) -> RiemannPairIso:
    scalar = _scalar(rho, u)
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(rho < 0.0):
        raise DomainError("density must be non-negative")
    if np.any(np.abs(u) >= params.c):
        raise DomainError("|u| must be below c")
    half_sum = params.c * np.arctanh(u / params.c)
    gap = gap_scale(params) * np.arctan(params.k * rho ** ((params.gamma - 1.0) / 2.0) / params.c)
    return RiemannPairIso(_out(half_sum - 0.5 * gap, scalar), _out(half_sum + 0.5 * gap, scalar))


def gap_quadrature(rho: float, params: GasParams) -> float:
    """z - w by direct quadrature of 2 int_0^rho sqrt(P')/(s + P/c^2) ds."""
    c2, k2, gamma = params.c ** 2, params.k ** 2, params.gamma

    def integrand(s: float) -> float:
        return params.k * np.sqrt(gamma) * s ** ((gamma - 1.0) / 2.0) / (s + k2 * s ** gamma / c2)

    return 2.0 * vacuum_regularized_integral(integrand, float(rho), gamma)


def _angle(w: np.ndarray, z: np.ndarray, params: GasParams) -> np.ndarray:
    return (z - w) * (params.gamma - 1.0) / (4.0 * params.c * np.sqrt(params.gamma))


def from_riemann_iso(pair: RiemannPairIso, params: GasParams) -> Tuple[ArrayLike, ArrayLike]:
    scalar = _scalar(pair.w, pair.z)
    w = np.asarray(pair.w, dtype=float)
    z = np.asarray(pair.z, dtype=float)
    gap = z - w
    if np.any(gap < 0.0):
        raise AdmissibilityError("z - w must be non-negative")
    if np.any(gap >= sonic_gap(params)):
        raise AdmissibilityError("z - w exceeds the sonic bound")
    u = params.c * np.tanh((w + z) / (2.0 * params.c))
    rho = (params.c / params.k * np.tan(_angle(w, z, params))) ** (2.0 / (params.gamma - 1.0))
    return _out(rho, scalar), _out(u, scalar)


def eigenvalues_iso(rho: ArrayLike, u: ArrayLike, params: GasParams) -> Tuple[ArrayLike, ArrayLike]:
    scalar = _scalar(rho, u)
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(rho < 0.0):
        raise DomainError("density must be non-negative")
    cs = sound_speed_iso(rho, params)
    if np.any(cs >= params.c):
        raise AdmissibilityError("sound speed reaches c")
    c2 = params.c ** 2
    lam1 = (u - cs) / (1.0 - u * cs / c2)
    lam2 = (u + cs) / (1.0 + u * cs / c2)
    return _out(lam1, scalar), _out(lam2, scalar)


def _phase(w: np.ndarray, z: np.ndarray, params: GasParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(s/2 - phi, s/2 + phi, dphi/d(z-w)) with phi = artanh(sqrt(gamma) tan Y)."""
    Y = _angle(w, z, params)
    sg = np.sqrt(params.gamma)
    t = np.tan(Y)
    phi = np.arctanh(sg * t)
    half_s = (w + z) / (2.0 * params.c)
    dphi = sg / np.cos(Y) ** 2 / (1.0 - params.gamma * t ** 2) * (params.gamma - 1.0) / (4.0 * params.c * sg)
    return half_s - phi, half_s + phi, dphi


def eigenvalues_from_invariants(w: ArrayLike, z: ArrayLike, params: GasParams) -> Tuple[np.ndarray, np.ndarray]:
    """lambda_i = c tanh(H_i / 2) with H1 = s - 2 phi, H2 = s + 2 phi."""
    A1, A2, _ = _phase(np.asarray(w, dtype=float), np.asarray(z, dtype=float), params)
    return params.c * np.tanh(A1), params.c * np.tanh(A2)


def exponents_H(w: ArrayLike, z: ArrayLike, params: GasParams) -> Tuple[np.ndarray, np.ndarray]:
    A1, A2, _ = _phase(np.asarray(w, dtype=float), np.asarray(z, dtype=float), params)
    return 2.0 * A1, 2.0 * A2


def eigenvalue_partials(w: ArrayLike, z: ArrayLike, params: GasParams) -> dict:
    """Closed-form dw/dz partials of lambda1 and lambda2."""
    A1, A2, dphi = _phase(np.asarray(w, dtype=float), np.asarray(z, dtype=float), params)
    c = params.c
    half = 1.0 / (2.0 * c)
    s1 = c / np.cosh(A1) ** 2
    s2 = c / np.cosh(A2) ** 2
    return {
        "dw_lambda1": s1 * (half + dphi),
        "dz_lambda1": s1 * (half - dphi),
        "dw_lambda2": s2 * (half - dphi),
        "dz_lambda2": s2 * (half + dphi),
    }


def weights_h1_h2(pair: RiemannPairIso, params: GasParams) -> Tuple[ArrayLike, ArrayLike]:
    scalar = _scalar(pair.w, pair.z)
    w = np.asarray(pair.w, dtype=float)
    z = np.asarray(pair.z, dtype=float)
    Y = _angle(w, z, params)
    if np.any(Y <= 0.0):
        raise SingularWeightError("weights need z - w > 0")
    if np.any(z - w >= sonic_gap(params)):
        raise AdmissibilityError("z - w exceeds the sonic bound")
    gamma = params.gamma
    p = (3.0 * gamma - 1.0) / (2.0 * gamma - 2.0)
    q = (gamma - 3.0) / (2.0 * gamma - 2.0)
    s = (w + z) / params.c
    es = np.exp(s)
    cos_y, sin_y = np.cos(Y), np.sin(Y)
    sg = np.sqrt(gamma)
    base = p * np.log(cos_y) + q * np.log(sin_y)
    h1 = base + (z - w) / (2.0 * params.c) - np.log((1.0 + es) * cos_y - (es - 1.0) * sg * sin_y)
    h2 = base + 0.5 * s - np.log((1.0 + es) * cos_y + (es - 1.0) * sg * sin_y)
    return _out(h1, scalar), _out(h2, scalar)


def riccati_coefficients(w: ArrayLike, z: ArrayLike, params: GasParams) -> Tuple[np.ndarray, np.ndarray]:
    """(e^{-h1} dw_lambda1, e^{-h2} dz_lambda2); both positive on the admissible wedge."""
    h1, h2 = weights_h1_h2(RiemannPairIso(np.asarray(w, dtype=float), np.asarray(z, dtype=float)), params)
    d = eigenvalue_partials(w, z, params)
    return np.exp(-np.asarray(h1)) * d["dw_lambda1"], np.exp(-np.asarray(h2)) * d["dz_lambda2"]


def gradient_state(
    w: np.ndarray, z: np.ndarray, dx_w: np.ndarray, dx_z: np.ndarray, params: GasParams
) -> GradientStateIso:
    h1, h2 = weights_h1_h2(RiemannPairIso(w, z), params)
    return GradientStateIso(
        dx_w=np.asarray(dx_w, dtype=float),
        dx_z=np.asarray(dx_z, dtype=float),
        xi=np.exp(h1) * dx_w,
        zeta=np.exp(h2) * dx_z,
    )


def quantity_Y(rho: ArrayLike, params: GasParams) -> ArrayLike:
    scalar = _scalar(rho)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0.0):
        raise DomainError("quantity_Y needs rho > 0")
    gamma = params.gamma
    y = params.k * rho ** ((gamma - 1.0) / 2.0) / params.c
    one_y2 = 1.0 + y * y
    value = (y / np.sqrt(one_y2)) ** ((3.0 - gamma) / (2.0 * gamma - 2.0)) * one_y2 ** ((gamma + 1.0) / (4.0 * gamma - 4.0))
    return _out(value, scalar)


def riccati_reciprocal_integral(trace, params: GasParams, coefficient: Optional[np.ndarray] = None) -> RiccatiPrediction:
    """1/xi(t) = 1/xi(0) + int_0^t e^{-h1} dw_lambda1 ds along a traced characteristic.

    Family-2 traces use zeta and e^{-h2} dz_lambda2 instead. A zero crossing of
    the reciprocal is the predicted blow-up time; when the trace ends first the
    crossing is extrapolated with the last coefficient value.
    """
    t = np.asarray(trace.t, dtype=float)
    if trace.family == 2:
        gradient0 = float(trace.quantities["zeta"][0])
    else:
        gradient0 = float(trace.quantities["xi"][0])
    if gradient0 == 0.0:
        raise DomainError("initial weighted gradient is zero; reciprocal undefined")
    if coefficient is None:
        k1, k2 = riccati_coefficients(trace.w, trace.z, params)
        coefficient = k2 if trace.family == 2 else k1
    coefficient = np.asarray(coefficient, dtype=float) * np.ones_like(t)
    reciprocal = 1.0 / gradient0 + composite_trapezoid(coefficient, t)

    blowup_time: Optional[float] = None
    extrapolated = False
    if gradient0 < 0.0:
        crossed = np.flatnonzero(reciprocal >= 0.0)
        if crossed.size:
            i = int(crossed[0])
            r0, r1 = reciprocal[i - 1], reciprocal[i]
            blowup_time = float(t[i - 1] + (t[i] - t[i - 1]) * (-r0) / (r1 - r0))
        elif coefficient[-1] > 0.0:
            blowup_time = float(t[-1] - reciprocal[-1] / coefficient[-1])
            extrapolated = True
    return RiccatiPrediction(t, reciprocal, coefficient, blowup_time, extrapolated)
