"""Polytropic equation of state.

Two laws share one parameter set:

* the barotropic law P = k^2 rho^gamma used by the isentropic system, and
* the implicit law n^gamma exp(S/Cv) + c^2 (n - rho) = 0, P = (gamma-1) n^gamma exp(S/Cv)
  used by the full system, with rho the mass-energy density and n the rest-mass density.

Every function accepts scalars or numpy arrays and returns the same shape.
"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from .errors import DomainError, InvalidInputError, NumericalError

ArrayLike = Union[float, np.ndarray]

TOL_EOS = 1e-12
_MAX_NEWTON = 200


class GasParams(BaseModel):
    """Physical constants of the polytropic gas (code units)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma: float = Field(2.0, gt=1.0, description="Adiabatic exponent")
    c: float = Field(1.0, gt=0.0, description="Light speed")
    k: float = Field(1.0, gt=0.0, description="Isentropic pressure constant, P = k^2 rho^gamma")
    R: float = Field(1.0, gt=0.0, description="Gas constant")
    B: float = Field(1.0, ge=0.0, description="Bound on |S| over the flow")

    @model_validator(mode="before")
    @classmethod
    def _drop_derived(cls, data: Any) -> Any:
        # manifests echo Cv; accept it back only when it is consistent
        if isinstance(data, dict) and "Cv" in data:
            data = dict(data)
            cv = data.pop("Cv")
            gamma = data.get("gamma", 2.0)
            R = data.get("R", 1.0)
            if not np.isclose(float(cv), float(R) / (float(gamma) - 1.0), rtol=1e-12, atol=0.0):
                raise ValueError("Cv must equal R/(gamma-1)")
        return data

    @computed_field
    @property
    def Cv(self) -> float:
        return self.R / (self.gamma - 1.0)


@dataclass(frozen=True)
class EosDerivatives:
    """First and second derivatives of the implicit law at (rho, S)."""
    dP_drho: np.ndarray
    dP_dS: np.ndarray
    d2P_drhodS: np.ndarray
    d2P_drho2: np.ndarray
    dn_drho: np.ndarray
    dn_dS: np.ndarray

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {
            "dP_drho": self.dP_drho,
            "dP_dS": self.dP_dS,
            "d2P_drhodS": self.d2P_drhodS,
            "d2P_drho2": self.d2P_drho2,
            "dn_drho": self.dn_drho,
            "dn_dS": self.dn_dS,
        }


def _inputs(*values: ArrayLike) -> Tuple[bool, Tuple[np.ndarray, ...]]:
    scalar = all(np.ndim(v) == 0 for v in values)
    arrays = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in values])
    return scalar, tuple(np.array(a, dtype=float) for a in arrays)


def _out(value: np.ndarray, scalar: bool) -> ArrayLike:
    return float(value) if scalar else value


def _check_density(rho: np.ndarray) -> None:
    if np.any(rho < 0.0) or np.any(np.isnan(rho)):
        raise DomainError("density must be non-negative")


def entropy_factor(S: ArrayLike, params: GasParams) -> ArrayLike:
    """exp(S/Cv)."""
    return np.exp(np.asarray(S, dtype=float) / params.Cv)


def pressure_isentropic(rho: ArrayLike, params: GasParams) -> ArrayLike:
    """Barotropic pressure k^2 rho^gamma."""
    scalar, (r,) = _inputs(rho)
    _check_density(r)
    return _out(params.k ** 2 * r ** params.gamma, scalar)


def rest_mass_density(rho: ArrayLike, S: ArrayLike, params: GasParams) -> ArrayLike:
    """Root n in [0, rho] of n^gamma exp(S/Cv) + c^2 (n - rho) = 0."""
    scalar, (r, s) = _inputs(rho, S)
    _check_density(r)
    n = _solve_rest_mass(r, s, params)
    return _out(n, scalar)


def _solve_rest_mass(rho: np.ndarray, S: np.ndarray, params: GasParams) -> np.ndarray:
    gamma, c2 = params.gamma, params.c ** 2
    kappa = np.exp(S / params.Cv)
    n = np.zeros_like(rho)
    positive = rho > 0.0
    if not np.any(positive):
        return n

    r = rho[positive]
    kap = kappa[positive]
    # the residual is convex and increasing in n, so Newton from the upper
    # bracket decreases monotonically onto the root
    hi = np.minimum(r, (c2 * r / kap) ** (1.0 / gamma))
    x = hi.copy()
    active = np.ones_like(x, dtype=bool)
    for _ in range(_MAX_NEWTON):
        xa = x[active]
        G = kap[active] * xa ** gamma + c2 * (xa - r[active])
        dG = gamma * kap[active] * xa ** (gamma - 1.0) + c2
        step = G / dG
        x_new = np.clip(xa - step, 0.0, hi[active])
        floor = 4.0 * np.finfo(float).eps * (kap[active] * xa ** gamma + c2 * (xa + r[active]))
        done = (
            (np.abs(x_new - xa) <= 1e-15 * np.maximum(xa, np.finfo(float).tiny))
            | (step <= 0.0)
            | (np.abs(G) <= floor)
        )
        x[active] = x_new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not np.any(active):
            break

    if np.any(active):
        x[active] = _bisect_rest_mass(r[active], kap[active], hi[active], params)

    residual = np.abs(kap * x ** gamma + c2 * (x - r))
    bound = TOL_EOS * np.maximum(1.0, c2 * r)
    if np.any(residual > bound):
        worst = int(np.argmax(residual / bound))
        raise NumericalError(
            "rest-mass density did not converge",
            {"rho": float(r[worst]), "residual": float(residual[worst]), "bound": float(bound[worst])},
        )
    n[positive] = x
    return n


def _bisect_rest_mass(rho: np.ndarray, kappa: np.ndarray, hi: np.ndarray, params: GasParams) -> np.ndarray:
    gamma, c2 = params.gamma, params.c ** 2
    lo = np.zeros_like(rho)
    up = hi.copy()
    for _ in range(200):
        mid = 0.5 * (lo + up)
        G = kappa * mid ** gamma + c2 * (mid - rho)
        lo = np.where(G < 0.0, mid, lo)
        up = np.where(G < 0.0, up, mid)
    return 0.5 * (lo + up)


def energy_ratio(n: ArrayLike, S: ArrayLike, params: GasParams) -> ArrayLike:
    """Specific internal energy over c^2: n^(gamma-1) exp(S/Cv) / c^2."""
    n = np.asarray(n, dtype=float)
    return n ** (params.gamma - 1.0) * np.exp(np.asarray(S, dtype=float) / params.Cv) / params.c ** 2


def pressure_full(rho: ArrayLike, S: ArrayLike, params: GasParams) -> ArrayLike:
    """Pressure of the implicit law, (gamma-1) n^gamma exp(S/Cv)."""
    scalar, (r, s) = _inputs(rho, S)
    _check_density(r)
    n = _solve_rest_mass(r, s, params)
    P = (params.gamma - 1.0) * n ** params.gamma * np.exp(s / params.Cv)
    return _out(P, scalar)


def state_from_rest_mass(n: ArrayLike, S: ArrayLike, params: GasParams) -> Tuple[np.ndarray, np.ndarray]:
    """Explicit (rho, P) from the rest-mass density."""
    n = np.asarray(n, dtype=float)
    kn = np.exp(np.asarray(S, dtype=float) / params.Cv) * n ** params.gamma
    return n + kn / params.c ** 2, (params.gamma - 1.0) * kn


def eos_derivatives(rho: ArrayLike, S: ArrayLike, params: GasParams) -> EosDerivatives:
    """Closed-form derivatives of the implicit law.

    The first derivatives have finite limits at rho = 0, but d2P_drho2 diverges
    there when gamma < 2 and such states are rejected.
    """
    _, (r, s) = _inputs(rho, S)
    _check_density(r)
    if params.gamma < 2.0 and np.any(r == 0.0):
        raise InvalidInputError(f"d2P/drho2 is singular at rho = 0 for gamma = {params.gamma:g} < 2")
    return derivatives_from_rest_mass(_solve_rest_mass(r, s, params), s, params)


def derivatives_from_rest_mass(n: np.ndarray, S: np.ndarray, params: GasParams) -> EosDerivatives:
    """Same derivatives written in terms of an already known rest-mass density."""
    gamma, c2, Cv = params.gamma, params.c ** 2, params.Cv
    n = np.asarray(n, dtype=float)
    kappa = np.exp(np.asarray(S, dtype=float) / Cv)
    m = kappa * n ** (gamma - 1.0) / c2
    one_gm = 1.0 + gamma * m

    dn_drho = 1.0 / one_gm
    dn_dS = -n * m / (Cv * one_gm)
    dP_drho = c2 * gamma * (gamma - 1.0) * m / one_gm
    dP_dS = (gamma - 1.0) * c2 * n * m / (Cv * one_gm)
    d2P_drhodS = c2 * gamma * (gamma - 1.0) * m * (1.0 + m) / (Cv * one_gm ** 3)
    with np.errstate(divide="ignore"):
        # m/n = kappa n^(gamma-2) / c^2
        d2P_drho2 = gamma * (gamma - 1.0) ** 2 * kappa * n ** (gamma - 2.0) / one_gm ** 3
    return EosDerivatives(dP_drho, dP_dS, d2P_drhodS, d2P_drho2, dn_drho, dn_dS)


def sound_speed(rho: ArrayLike, S: ArrayLike, params: GasParams) -> ArrayLike:
    """sqrt(dP/drho) of the implicit law."""
    scalar, (r, s) = _inputs(rho, S)
    _check_density(r)
    n = _solve_rest_mass(r, s, params)
    return _out(np.sqrt(derivatives_from_rest_mass(n, s, params).dP_drho), scalar)


def rest_mass_ratio(rho: ArrayLike, S: ArrayLike, params: GasParams) -> ArrayLike:
    """rho * dn/drho / n, which equals (1+m)/(1+gamma m) and tends to 1 at vacuum."""
    scalar, (r, s) = _inputs(rho, S)
    _check_density(r)
    n = _solve_rest_mass(r, s, params)
    out = np.ones_like(r)
    pos = n > 0.0
    out[pos] = r[pos] * (1.0 / (1.0 + params.gamma * energy_ratio(n[pos], s[pos], params))) / n[pos]
    return _out(out, scalar)


def asymptotic_orders_check(params: GasParams, rho_sequence: np.ndarray, S: float = 0.0) -> Dict[str, float]:
    """Log-log slopes of P, dP/drho, dP/dS and d2P/drhodS against rho."""
    rho = np.asarray(rho_sequence, dtype=float)
    if rho.ndim != 1 or rho.size < 3:
        raise InvalidInputError("rho_sequence needs at least three samples")
    if np.any(rho <= 0.0) or np.any(np.diff(rho) >= 0.0):
        raise InvalidInputError("rho_sequence must be positive and strictly decreasing")
    if np.log10(rho[0] / rho[-1]) < 3.0 - 1e-12:
        raise InvalidInputError("rho_sequence must span at least three decades")

    S_arr = np.full_like(rho, S)
    d = eos_derivatives(rho, S_arr, params)
    series = {
        "P": pressure_full(rho, S_arr, params),
        "dP_drho": d.dP_drho,
        "dP_dS": d.dP_dS,
        "d2P_drhodS": d.d2P_drhodS,
    }
    log_rho = np.log(rho)
    return {name: float(np.polyfit(log_rho, np.log(values), 1)[0]) for name, values in series.items()}
