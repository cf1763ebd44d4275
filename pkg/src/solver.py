"""Finite-volume solver for the relativistic Euler system with an advected entropy tracer.

Conserved variables are D = (c^4 rho + P u^2) / (c^2 (c^2 - u^2)) and
m = (c^2 rho + P) u / (c^2 - u^2); the entropy obeys S_t + u S_x = 0 and is
carried as a non-conservative tracer. One step is MUSCL-minmod reconstruction
of (nu, u, S), an HLL flux with Davis wave-speed estimates and SSP-RK2 in time.
nu is rho for the barotropic law and the rest-mass density n for the polytropic law.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .differencing import grid_gradient, grid_second_derivative
from .eos import GasParams, rest_mass_density
from .errors import AdmissibilityError, DomainError, InvalidInputError, RecoveryError
from .isentropic import gap_scale
from .nonisentropic import gap_rate
from .profiles import InitialData

MAX_NEWTON = 50
NEWTON_TOL = 1e-14
RECOVERY_TOL = 1e-12
DEFAULT_CFL = 0.4
GHOSTS = 2


class GasLaw:
    """Closure in terms of the evolved density variable nu."""

    def __init__(self, params: GasParams):
        self.params = params

    def density(self, nu: np.ndarray, S: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def pressure(self, nu: np.ndarray, S: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivatives(self, nu: np.ndarray, S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(d rho/d nu, d P/d nu) at fixed S."""
        raise NotImplementedError

    def from_density(self, rho: np.ndarray, S: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sound_speed(self, nu: np.ndarray, S: np.ndarray) -> np.ndarray:
        drho, dP = self.derivatives(nu, S)
        return np.sqrt(dP / drho)


class BarotropicLaw(GasLaw):
    """P = k^2 rho^gamma; nu = rho and S is a passive label."""

    def density(self, nu, S):
        return nu

    def pressure(self, nu, S):
        return self.params.k ** 2 * nu ** self.params.gamma

    def derivatives(self, nu, S):
        p = self.params
        return np.ones_like(nu), p.gamma * p.k ** 2 * nu ** (p.gamma - 1.0)

    def from_density(self, rho, S):
        return np.asarray(rho, dtype=float)


class PolytropicLaw(GasLaw):
    """rho = n + kappa n^gamma / c^2 and P = (gamma-1) kappa n^gamma with kappa = exp(S/Cv)."""

    def density(self, nu, S):
        p = self.params
        return nu + np.exp(S / p.Cv) * nu ** p.gamma / p.c ** 2

    def pressure(self, nu, S):
        p = self.params
        return (p.gamma - 1.0) * np.exp(S / p.Cv) * nu ** p.gamma

    def derivatives(self, nu, S):
        p = self.params
        kn = np.exp(S / p.Cv) * nu ** (p.gamma - 1.0)
        return 1.0 + p.gamma * kn / p.c ** 2, p.gamma * (p.gamma - 1.0) * kn

    def from_density(self, rho, S):
        return np.asarray(rest_mass_density(rho, S, self.params), dtype=float)


def make_law(model: str, params: GasParams) -> GasLaw:
    if model == "isentropic":
        return BarotropicLaw(params)
    if model == "full":
        return PolytropicLaw(params)
    raise InvalidInputError(f"unknown model {model!r}")


@dataclass(frozen=True)
class ConservedState:
    D: np.ndarray
    m: np.ndarray
    sigma: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.stack([self.D, self.m, self.sigma])


@dataclass(frozen=True)
class Primitive:
    nu: np.ndarray
    u: np.ndarray
    S: np.ndarray
    rho: np.ndarray
    P: np.ndarray


@dataclass
class FieldSnapshot:
    t: float
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    S: np.ndarray
    nu: np.ndarray
    D: np.ndarray
    m: np.ndarray
    w: np.ndarray
    z: np.ndarray
    grads: Dict[str, np.ndarray]


@dataclass
class RunHistory:
    model: str
    params: GasParams
    dx: float
    periodic: bool
    snapshots: List[FieldSnapshot] = field(default_factory=list)
    monitor: Dict[str, List[float]] = field(default_factory=dict)
    steps: int = 0
    stop_reason: str = "t_end"
    failure: Optional[Dict[str, Any]] = None

    @property
    def final(self) -> FieldSnapshot:
        return self.snapshots[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])


def _primitive(law: GasLaw, nu: np.ndarray, u: np.ndarray, S: np.ndarray) -> Primitive:
    return Primitive(nu=nu, u=u, S=S, rho=law.density(nu, S), P=law.pressure(nu, S))


def _conserved(law: GasLaw, nu: np.ndarray, u: np.ndarray, S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    c2 = law.params.c ** 2
    rho, P = law.density(nu, S), law.pressure(nu, S)
    W = 1.0 / (c2 - u * u)
    e = c2 * rho + P
    return e * W - P / c2, e * u * W


def _flux(law: GasLaw, nu: np.ndarray, u: np.ndarray, S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    c2 = law.params.c ** 2
    rho, P = law.density(nu, S), law.pressure(nu, S)
    ratio = (c2 * rho + P) * u / (c2 - u * u)
    return ratio, ratio * u + P


def _speeds(law: GasLaw, nu: np.ndarray, u: np.ndarray, S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    c2 = law.params.c ** 2
    cs = law.sound_speed(nu, S)
    return (u - cs) / (1.0 - u * cs / c2), (u + cs) / (1.0 + u * cs / c2)


def _check_primitive(law: GasLaw, nu: np.ndarray, u: np.ndarray, S: np.ndarray) -> None:
    if np.any(nu < 0.0) or np.any(~np.isfinite(nu)):
        raise DomainError("density must be non-negative")
    if np.any(np.abs(u) >= law.params.c):
        raise DomainError("|u| must be below c")
    if np.any(law.sound_speed(nu, S) >= law.params.c):
        raise AdmissibilityError("sound speed reaches c")


def prim_to_cons(rho: np.ndarray, u: np.ndarray, S: np.ndarray, params: GasParams, model: str = "isentropic") -> ConservedState:
    law = make_law(model, params)
    rho, u, S = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(rho, u, S))
    nu = law.from_density(rho, S)
    _check_primitive(law, nu, u, S)
    D, m = _conserved(law, nu, u, S)
    return ConservedState(D=D, m=m, sigma=S.copy())


def _initial_guess(law: GasLaw, D: np.ndarray, m: np.ndarray, S: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    c = law.params.c
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.clip(np.nan_to_num(m / D), -0.9 * c, 0.9 * c)
    rho = np.maximum(D * (1.0 - (u / c) ** 2), np.finfo(float).tiny)
    return law.from_density(rho, S), u


def _residuals(law: GasLaw, nu, u, S, D, m) -> Tuple[np.ndarray, np.ndarray]:
    Dn, mn = _conserved(law, nu, u, S)
    return Dn - D, mn - m


def _recovery_error(law: GasLaw, nu, u, S, D, m) -> np.ndarray:
    f1, f2 = _residuals(law, nu, u, S, D, m)
    scale = np.maximum(np.abs(D), np.finfo(float).tiny)
    return np.maximum(np.abs(f1) / scale, np.abs(f2) / (law.params.c * scale))


def _newton(law: GasLaw, D, m, S, nu, u) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = law.params.c
    c2 = c * c
    nu, u = nu.copy(), u.copy()
    active = np.ones(D.shape, dtype=bool)
    for _ in range(MAX_NEWTON):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        n_, v, s = nu[idx], u[idx], S[idx]
        rho, P = law.density(n_, s), law.pressure(n_, s)
        drho, dP = law.derivatives(n_, s)
        W = 1.0 / (c2 - v * v)
        e = c2 * rho + P
        f1 = e * W - P / c2 - D[idx]
        f2 = e * v * W - m[idx]
        done = (np.abs(f1) <= NEWTON_TOL * D[idx]) & (np.abs(f2) <= NEWTON_TOL * c * D[idx])

        de = c2 * drho + dP
        j11 = de * W - dP / c2
        j12 = 2.0 * e * v * W * W
        j21 = de * v * W
        j22 = e * W * W * (c2 + v * v)
        det = j11 * j22 - j12 * j21
        with np.errstate(divide="ignore", invalid="ignore"):
            d_nu = (f1 * j22 - f2 * j12) / det
            d_u = (j11 * f2 - j21 * f1) / det
        lam = np.ones_like(d_nu)
        for _ in range(60):
            nu_new = n_ - lam * d_nu
            u_new = v - lam * d_u
            bad = (nu_new <= 0.0) | (np.abs(u_new) >= c) | ~np.isfinite(nu_new) | ~np.isfinite(u_new)
            if not np.any(bad):
                break
            lam = np.where(bad, 0.5 * lam, lam)
        step = ~done & ~bad
        nu[idx[step]] = nu_new[step]
        u[idx[step]] = u_new[step]
        small = (np.abs(lam * d_nu) <= NEWTON_TOL * n_) & (np.abs(lam * d_u) <= NEWTON_TOL * c)
        active[idx[done | small | bad]] = False
    return nu, u, _recovery_error(law, nu, u, S, D, m)


def _bracketed(law: GasLaw, D: float, m: float, S: float) -> Tuple[float, float]:
    """Scalar fallback: eliminate u = m / (D + P/c^2) and solve for nu on [0, D]."""
    c2 = law.params.c ** 2
    s = np.array(S)
    if not (D > 0.0 and abs(m) < law.params.c * D):
        raise ValueError("conserved state outside the physical cone")

    def velocity(nu: float) -> float:
        return m / (D + float(law.pressure(np.array(nu), s)) / c2)

    def g(nu: float) -> float:
        rho = float(law.density(np.array(nu), s))
        P = float(law.pressure(np.array(nu), s))
        v = velocity(nu)
        return c2 * rho + P - (c2 - v * v) * (D + P / c2)

    nu = brentq(g, 0.0, D, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    return float(nu), float(velocity(nu))


def recover(
    law: GasLaw,
    D: np.ndarray,
    m: np.ndarray,
    S: np.ndarray,
    guess: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Primitive:
    """Primitive state from (D, m, S): damped 2x2 Newton, bracketed scalar fallback per failed cell."""
    D, m, S = (np.asarray(v, dtype=float) for v in np.broadcast_arrays(D, m, S))
    bad_input = ~(D > 0.0) | ~np.isfinite(m)
    if np.any(bad_input):
        cells = np.flatnonzero(bad_input)
        raise RecoveryError("non-positive or non-finite conserved energy", cells.tolist(),
                            {"D": D[cells[:5]].tolist()})
    nu0, u0 = guess if guess is not None else _initial_guess(law, D, m, S)
    nu, u, err = _newton(law, D, m, S, np.asarray(nu0, dtype=float), np.asarray(u0, dtype=float))

    failed = np.flatnonzero(~(err <= RECOVERY_TOL))
    still: List[int] = []
    for i in failed:
        try:
            nu[i], u[i] = _bracketed(law, float(D[i]), float(m[i]), float(S[i]))
        except ValueError:
            still.append(int(i))
            continue
        if not _recovery_error(law, nu[i:i + 1], u[i:i + 1], S[i:i + 1], D[i:i + 1], m[i:i + 1])[0] <= RECOVERY_TOL:
            still.append(int(i))
    if still:
        raise RecoveryError(
            f"primitive recovery failed in {len(still)} cell(s)",
            still,
            {"D": D[still[:5]].tolist(), "m": m[still[:5]].tolist()},
        )
    cs = law.sound_speed(nu, S)
    bad = np.flatnonzero((nu <= 0.0) | (np.abs(u) >= law.params.c) | (cs >= law.params.c))
    if bad.size:
        raise RecoveryError("recovered state is not admissible", bad.tolist(), {"u": u[bad[:5]].tolist()})
    return _primitive(law, nu, u, S)


def cons_to_prim(cons: ConservedState, params: GasParams, model: str = "isentropic",
                 guess: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> Primitive:
    return recover(make_law(model, params), cons.D, cons.m, cons.sigma, guess)


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _pad(q: np.ndarray, periodic: bool) -> np.ndarray:
    return np.pad(q, GHOSTS, mode="wrap" if periodic else "edge")


def riemann_fields(prim: Primitive, law: GasLaw) -> Tuple[np.ndarray, np.ndarray]:
    """(w, z) of a primitive state; the full model uses the closed half gap in the internal energy."""
    p = law.params
    half_sum = p.c * np.arctanh(prim.u / p.c)
    if isinstance(law, BarotropicLaw):
        half_gap = 0.5 * gap_scale(p) * np.arctan(p.k * prim.nu ** ((p.gamma - 1.0) / 2.0) / p.c)
    else:
        m_int = np.exp(prim.S / p.Cv) * prim.nu ** (p.gamma - 1.0) / p.c ** 2
        half_gap = np.arcsinh(np.sqrt(p.gamma * m_int)) / gap_rate(p)
    return half_sum - half_gap, half_sum + half_gap


class FiniteVolumeSolver:
    """HLL + MUSCL-minmod + SSP-RK2 on a uniform grid with periodic or outflow ghosts."""

    def __init__(self, params: GasParams, model: str, dx: float, periodic: bool, cfl: float = DEFAULT_CFL):
        if not 0.0 < cfl < 1.0:
            raise InvalidInputError("cfl must lie in (0, 1)")
        self.law = make_law(model, params)
        self.params = params
        self.model = model
        self.dx = dx
        self.periodic = periodic
        self.cfl = cfl

    def rhs(self, prim: Primitive) -> np.ndarray:
        """-dF/dx for (D, m) and -u dS/dx for the tracer."""
        law, dx = self.law, self.dx
        padded = [_pad(q, self.periodic) for q in (prim.nu, prim.u, prim.S)]
        slopes = [_minmod(q[1:-1] - q[:-2], q[2:] - q[1:-1]) for q in padded]
        # interfaces between padded cells j and j+1 for j = 1 .. N+1
        left = [q[1:-2] + 0.5 * s[:-1] for q, s in zip(padded, slopes)]
        right = [q[2:-1] - 0.5 * s[1:] for q, s in zip(padded, slopes)]

        DL, mL = _conserved(law, *left)
        DR, mR = _conserved(law, *right)
        FL = _flux(law, *left)
        FR = _flux(law, *right)
        lmL, lpL = _speeds(law, *left)
        lmR, lpR = _speeds(law, *right)
        sL = np.minimum(lmL, lmR)
        sR = np.maximum(lpL, lpR)

        fluxes = []
        for UL, UR, fL, fR in ((DL, DR, FL[0], FR[0]), (mL, mR, FL[1], FR[1])):
            with np.errstate(divide="ignore", invalid="ignore"):
                mid = (sR * fL - sL * fR + sL * sR * (UR - UL)) / (sR - sL)
            fluxes.append(np.where(sL >= 0.0, fL, np.where(sR <= 0.0, fR, mid)))

        out = np.empty((3, prim.nu.size))
        out[0] = -(fluxes[0][1:] - fluxes[0][:-1]) / dx
        out[1] = -(fluxes[1][1:] - fluxes[1][:-1]) / dx

        S, sS = padded[2], slopes[2]
        face_L = S[1:-1] + 0.5 * sS
        face_R = S[1:-1] - 0.5 * sS
        upwind = (face_L[1:-1] - face_L[:-2]) / dx
        downwind = (face_R[2:] - face_R[1:-1]) / dx
        u = prim.u
        out[2] = -np.where(u > 0.0, u * upwind, u * downwind)
        return out

    def time_step(self, prim: Primitive) -> float:
        lm, lp = _speeds(self.law, prim.nu, prim.u, prim.S)
        return self.cfl * self.dx / float(np.max(np.maximum(np.abs(lm), np.abs(lp))))

    def _recover(self, U: np.ndarray, guess: Primitive) -> Primitive:
        return recover(self.law, U[0], U[1], U[2], (guess.nu, guess.u))

    def advance(self, U: np.ndarray, prim: Primitive, dt: float) -> Tuple[np.ndarray, Primitive]:
        U1 = U + dt * self.rhs(prim)
        prim1 = self._recover(U1, prim)
        U2 = 0.5 * U + 0.5 * (U1 + dt * self.rhs(prim1))
        return U2, self._recover(U2, prim1)

    def initial_state(self, data: InitialData) -> Tuple[np.ndarray, Primitive]:
        nu = self.law.from_density(np.asarray(data.rho, dtype=float), np.asarray(data.S, dtype=float))
        _check_primitive(self.law, nu, data.u, data.S)
        prim = _primitive(self.law, nu, np.asarray(data.u, dtype=float), np.asarray(data.S, dtype=float).copy())
        D, m = _conserved(self.law, prim.nu, prim.u, prim.S)
        return np.stack([D, m, prim.S]), prim

    def snapshot(self, t: float, x: np.ndarray, U: np.ndarray, prim: Primitive) -> FieldSnapshot:
        w, z = riemann_fields(prim, self.law)
        dx, periodic = self.dx, self.periodic
        grads = {
            "dxw": grid_gradient(w, dx, periodic),
            "dxz": grid_gradient(z, dx, periodic),
            "dxS": grid_gradient(prim.S, dx, periodic),
            "dxxS": grid_second_derivative(prim.S, dx, periodic),
        }
        return FieldSnapshot(
            t=float(t), x=x, rho=prim.rho.copy(), u=prim.u.copy(), S=prim.S.copy(), nu=prim.nu.copy(),
            D=U[0].copy(), m=U[1].copy(), w=w, z=z, grads=grads,
        )

    def _record(self, history: RunHistory, t: float, U: np.ndarray, prim: Primitive) -> Tuple[float, float]:
        w, z = riemann_fields(prim, self.law)
        dxw = float(np.max(np.abs(grid_gradient(w, self.dx, self.periodic))))
        dxz = float(np.max(np.abs(grid_gradient(z, self.dx, self.periodic))))
        for key, value in (
            ("t", t), ("max_dxz", dxz), ("max_dxw", dxw), ("min_rho", float(prim.rho.min())),
            ("total_D", float(U[0].sum() * self.dx)), ("total_m", float(U[1].sum() * self.dx)),
            ("max_abs_S", float(np.max(np.abs(prim.S)))),
        ):
            history.monitor.setdefault(key, []).append(value)
        return dxw, dxz

    def run(
        self,
        data: InitialData,
        t_end: float,
        output_cadence: float,
        max_steps: int = 1_000_000,
        stop_growth: Optional[float] = None,
    ) -> RunHistory:
        """March to t_end, storing a snapshot every `output_cadence` in time.

        With `stop_growth` the run ends once max|dx z| or max|dx w| exceeds that
        multiple of its initial value. A recovery failure ends the run and is
        recorded in `failure`.
        """
        if not t_end > 0.0 or not output_cadence > 0.0:
            raise InvalidInputError("t_end and output_cadence must be positive")
        U, prim = self.initial_state(data)
        history = RunHistory(model=self.model, params=self.params, dx=self.dx, periodic=self.periodic)
        t = 0.0
        history.snapshots.append(self.snapshot(t, data.x, U, prim))
        g0 = self._record(history, t, U, prim)
        next_output = output_cadence
        while t < t_end * (1.0 - 1e-14):
            if history.steps >= max_steps:
                history.stop_reason = "max_steps"
                break
            dt = min(self.time_step(prim), next_output - t, t_end - t)
            try:
                U, prim = self.advance(U, prim, dt)
            except RecoveryError as e:
                history.stop_reason = "recovery_failure"
                history.failure = {"t": t, "message": str(e), "cells": e.cells[:20], "diagnostics": e.diagnostics}
                break
            t += dt
            history.steps += 1
            gw, gz = self._record(history, t, U, prim)
            growth = stop_growth is not None and (
                (g0[0] > 0.0 and gw >= stop_growth * g0[0]) or (g0[1] > 0.0 and gz >= stop_growth * g0[1])
            )
            if t >= next_output * (1.0 - 1e-12) or t >= t_end * (1.0 - 1e-14) or growth:
                history.snapshots.append(self.snapshot(t, data.x, U, prim))
                while next_output <= t * (1.0 + 1e-12):
                    next_output += output_cadence
            if growth:
                history.stop_reason = "growth"
                break
        return history


def step(snapshot: FieldSnapshot, cfl: float, params: GasParams, model: str, periodic: bool) -> FieldSnapshot:
    """One CFL-limited SSP-RK2 step of a stored snapshot."""
    dx = float(snapshot.x[1] - snapshot.x[0])
    solver = FiniteVolumeSolver(params, model, dx, periodic, cfl)
    prim = _primitive(solver.law, snapshot.nu, snapshot.u, snapshot.S)
    U = np.stack([snapshot.D, snapshot.m, snapshot.S])
    dt = solver.time_step(prim)
    U, prim = solver.advance(U, prim, dt)
    return solver.snapshot(snapshot.t + dt, snapshot.x, U, prim)


def solve(
    data: InitialData,
    params: GasParams,
    model: str,
    t_end: float,
    cfl: float = DEFAULT_CFL,
    output_cadence: Optional[float] = None,
    max_steps: int = 1_000_000,
    stop_growth: Optional[float] = None,
) -> RunHistory:
    solver = FiniteVolumeSolver(params, model, data.dx, data.periodic, cfl)
    return solver.run(data, t_end, output_cadence or t_end, max_steps, stop_growth)


def conservation_drift(history: RunHistory) -> Dict[str, float]:
    """Largest per-step relative change of the totals of D and m."""
    out = {}
    for key in ("total_D", "total_m"):
        series = np.asarray(history.monitor[key])
        scale = max(1.0, float(np.max(np.abs(series))))
        out[key] = float(np.max(np.abs(np.diff(series)))) / scale if series.size > 1 else 0.0
    return out


def n_tilde_residual(history: RunHistory) -> Optional[float]:
    """max |d_t n_t + d_x(u n_t)| / max n_t between consecutive snapshots; None for the barotropic law."""
    if history.model != "full" or len(history.snapshots) < 2:
        return None
    c = history.params.c
    worst = 0.0
    scale = 0.0
    for a, b in zip(history.snapshots[:-1], history.snapshots[1:]):
        dt = b.t - a.t
        if dt <= 0.0:
            continue
        nts = [c * s.nu / np.sqrt(c * c - s.u ** 2) for s in (a, b)]
        flux = [grid_gradient(s.u * nt, history.dx, history.periodic) for s, nt in zip((a, b), nts)]
        residual = (nts[1] - nts[0]) / dt + 0.5 * (flux[0] + flux[1])
        if not history.periodic:
            residual = residual[3:-3]
        worst = max(worst, float(np.max(np.abs(residual))))
        scale = max(scale, float(np.max(nts[0])))
    return worst / scale if scale > 0.0 else 0.0


@dataclass
class BlowupObservation:
    declared: bool
    candidate: bool
    t_candidate: Optional[float]
    location: Optional[float]
    growth: float
    ratio: Optional[float]
    window: Optional[Tuple[float, float]]
    reason: str = ""

    def as_dict(self) -> Dict[str, Any]:
        return {
            "declared": self.declared,
            "candidate": self.candidate,
            "t_candidate": self.t_candidate,
            "location": self.location,
            "growth": self.growth,
            "ratio": self.ratio,
            "window": list(self.window) if self.window else None,
            "reason": self.reason,
        }


def peak_gradient_series(history: RunHistory) -> Tuple[np.ndarray, np.ndarray]:
    """Per-step times and max(max|dx z|, max|dx w|)."""
    t = np.asarray(history.monitor["t"])
    g = np.maximum(np.asarray(history.monitor["max_dxz"]), np.asarray(history.monitor["max_dxw"]))
    return t, g


def monitor_blowup(
    history: RunHistory,
    growth_factor: float = 100.0,
    refined: Optional[RunHistory] = None,
    band: Tuple[float, float] = (1.6, 2.4),
) -> BlowupObservation:
    """Two-pronged blow-up test: gradient growth past `growth_factor` and a fine/coarse peak ratio inside `band`.

    A recovery failure also marks a candidate. Without a refined run nothing is declared.
    """
    t, g = peak_gradient_series(history)
    g0 = float(g[0])
    growth = float(g.max() / g0) if g0 > 0.0 else float("inf") if g.max() > 0.0 else 1.0
    hit = np.flatnonzero(g >= growth_factor * g0) if g0 > 0.0 else np.array([], dtype=int)

    if hit.size:
        i = int(hit[0])
        t_candidate = float(t[i])
        window = (float(t[i - 1]) if i > 0 else 0.0, t_candidate)
        reason = "gradient growth"
    elif history.failure is not None:
        t_candidate = float(history.failure["t"])
        window = (float(t[-1]), t_candidate)
        reason = "recovery failure"
    else:
        return BlowupObservation(False, False, None, None, growth, None, None, "no candidate")

    snap = min(history.snapshots, key=lambda s: abs(s.t - t_candidate))
    peak = np.maximum(np.abs(snap.grads["dxz"]), np.abs(snap.grads["dxw"]))
    location = float(snap.x[int(np.argmax(peak))])

    ratio = None
    declared = False
    if refined is not None:
        tf, gf = peak_gradient_series(refined)
        coarse = float(np.interp(t_candidate, t, g))
        fine = float(np.interp(min(t_candidate, tf[-1]), tf, gf))
        ratio = fine / coarse if coarse > 0.0 else None
        declared = ratio is not None and band[0] <= ratio <= band[1]
        reason += "; refinement ratio " + ("inside" if declared else "outside") + " band"
    return BlowupObservation(declared, True, t_candidate, location, growth, ratio, window, reason)
