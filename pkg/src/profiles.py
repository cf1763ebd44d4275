"""Initial data: analytic profile families, CSV samples and the quantities derived from them."""
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from .differencing import grid_gradient, grid_second_derivative
from .eos import GasParams, rest_mass_density
from .errors import InvalidInputError
from .isentropic import RiemannPairIso, from_riemann_iso, gradient_state, to_riemann_iso
from .nonisentropic import (
    ConservedAlongFlow,
    RiemannTriple,
    conserved_along_flow,
    from_riemann_non,
    gradient_state_non,
    n_tilde,
    to_riemann_non,
)

CSV_COLUMNS = ("x", "rho", "u", "S")
DERIVATIVE_ORDER = 4
_SPACING_RTOL = 1e-8


class FieldProfile(BaseModel):
    """base + amplitude * shape(x) for one primitive field."""
    model_config = ConfigDict(extra="forbid")

    family: Literal["constant", "gaussian-bump", "tanh-ramp", "sine"] = "constant"
    base: float = 0.0
    amplitude: float = 0.0
    center: float = 0.0
    width: float = Field(1.0, gt=0.0)
    wavenumber: int = Field(1, ge=1, description="Periods over the domain (sine only)")

    def sup_abs(self, scale: float = 1.0) -> float:
        if self.family == "constant":
            return abs(self.base)
        return abs(self.base) + abs(scale * self.amplitude)

    def evaluate(self, x: np.ndarray, x_min: float, x_max: float, scale: float = 1.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "constant":
            return np.full_like(x, self.base)
        if self.family == "gaussian-bump":
            shape = np.exp(-(((x - self.center) / self.width) ** 2))
        elif self.family == "tanh-ramp":
            shape = np.tanh((x - self.center) / self.width)
        else:
            shape = np.sin(2.0 * np.pi * self.wavenumber * (x - x_min) / (x_max - x_min))
        return self.base + scale * self.amplitude * shape


@dataclass(frozen=True)
class InitialData:
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    S: np.ndarray
    periodic: bool

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def cells(self) -> int:
        return int(self.x.size)

    def resample(self, x_new: np.ndarray) -> "InitialData":
        """Linear interpolation onto new sample points (periodic wrap when periodic)."""
        period = self.x[-1] - self.x[0] + self.dx if self.periodic else None
        fields = [np.interp(x_new, self.x, f, period=period) for f in (self.rho, self.u, self.S)]
        return InitialData(np.asarray(x_new, dtype=float), *fields, periodic=self.periodic)

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x, "rho": self.rho, "u": self.u, "S": self.S})


@dataclass(frozen=True)
class DerivedInitial:
    """Riemann variables, gradients and weighted gradients of one initial state.

    The isentropic model fills xi0/zeta0; the full model fills the entropy
    gradient fields, theta, eps and r0/q0 (r0/q0 only when eps > 0).
    """
    model: str
    x: np.ndarray
    w0: np.ndarray
    z0: np.ndarray
    S0: np.ndarray
    dx_w: np.ndarray
    dx_z: np.ndarray
    vacuum: np.ndarray
    xi0: Optional[np.ndarray] = None
    zeta0: Optional[np.ndarray] = None
    eta0: Optional[np.ndarray] = None
    dxx_S0: Optional[np.ndarray] = None
    n_t0: Optional[np.ndarray] = None
    dx_n_t0: Optional[np.ndarray] = None
    theta: Optional[ConservedAlongFlow] = None
    eps: Optional[float] = None
    r0: Optional[np.ndarray] = None
    q0: Optional[np.ndarray] = None


def cell_centers(x_min: float, x_max: float, cells: int) -> np.ndarray:
    if cells < 2 or not x_max > x_min:
        raise InvalidInputError("grid needs x_max > x_min and at least two cells")
    dx = (x_max - x_min) / cells
    return x_min + (np.arange(cells) + 0.5) * dx


def from_profiles(
    rho: FieldProfile,
    u: FieldProfile,
    S: FieldProfile,
    x_min: float,
    x_max: float,
    cells: int,
    periodic: bool,
    scale: float = 1.0,
) -> InitialData:
    """Sample the three profile families at cell centers; `scale` multiplies the velocity amplitude."""
    x = cell_centers(x_min, x_max, cells)
    return InitialData(
        x=x,
        rho=rho.evaluate(x, x_min, x_max),
        u=u.evaluate(x, x_min, x_max, scale),
        S=S.evaluate(x, x_min, x_max),
        periodic=periodic,
    )


def load_csv(path: str, periodic: bool, min_samples: int = 2) -> InitialData:
    """Read x, rho, u, S columns; the x column must be uniformly spaced and increasing."""
    frame = pd.read_csv(path)
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise InvalidInputError(f"{path}: missing columns {missing}")
    frame = frame[list(CSV_COLUMNS)].astype(float)
    if frame.isna().to_numpy().any():
        raise InvalidInputError(f"{path}: empty or non-numeric entries")
    if len(frame) < max(min_samples, 5):
        raise InvalidInputError(
            f"{path}: {len(frame)} samples; at least {max(min_samples, 5)} are required"
        )
    x = frame["x"].to_numpy()
    spacing = np.diff(x)
    if np.any(spacing <= 0.0) or np.ptp(spacing) > _SPACING_RTOL * spacing.mean():
        raise InvalidInputError(f"{path}: x must be uniformly spaced and increasing")
    return InitialData(x, frame["rho"].to_numpy(), frame["u"].to_numpy(), frame["S"].to_numpy(), periodic)


def simple_wave(
    x: np.ndarray,
    params: GasParams,
    model: str,
    w_const: float,
    z_lo: float,
    z_hi: float,
    center: float = 0.0,
    width: float = 1.0,
    S_const: float = 0.0,
) -> InitialData:
    """Data with w constant and z a tanh ramp from z_lo to z_hi; S constant in the full model."""
    x = np.asarray(x, dtype=float)
    z = z_lo + 0.5 * (z_hi - z_lo) * (1.0 + np.tanh((x - center) / width))
    w = np.full_like(x, w_const)
    if model == "isentropic":
        rho, u = from_riemann_iso(RiemannPairIso(w, z), params)
        S = np.full_like(x, S_const)
    else:
        rho, u, S = from_riemann_non(RiemannTriple(w, z, np.full_like(x, S_const)), params)
    return InitialData(x, np.asarray(rho), np.asarray(u), np.asarray(S), periodic=False)


def derive_initial(data: InitialData, params: GasParams, model: str, rho_floor: float = 1e-12) -> DerivedInitial:
    dx, periodic = data.dx, data.periodic

    def grad(f: np.ndarray) -> np.ndarray:
        return grid_gradient(f, dx, periodic, order=DERIVATIVE_ORDER)

    vacuum = data.rho < rho_floor
    if model == "isentropic":
        pair = to_riemann_iso(data.rho, data.u, params)
        w0, z0 = np.asarray(pair.w), np.asarray(pair.z)
        dx_w, dx_z = grad(w0), grad(z0)
        xi0 = np.zeros_like(w0)
        zeta0 = np.zeros_like(z0)
        live = ~vacuum
        if np.any(live):
            g = gradient_state(w0[live], z0[live], dx_w[live], dx_z[live], params)
            xi0[live], zeta0[live] = g.xi, g.zeta
        return DerivedInitial(
            model=model, x=data.x, w0=w0, z0=z0, S0=np.asarray(data.S, dtype=float),
            dx_w=dx_w, dx_z=dx_z, vacuum=vacuum, xi0=xi0, zeta0=zeta0,
        )

    triple = to_riemann_non(data.rho, data.u, data.S, params)
    w0, z0, S0 = triple.arrays()
    dx_w, dx_z, eta0 = grad(w0), grad(z0), grad(S0)
    n_t0 = n_tilde(rest_mass_density(data.rho, data.S, params), data.u, params)
    dx_n_t0 = grad(n_t0)
    dxx_S0 = grid_second_derivative(S0, dx, periodic, order=DERIVATIVE_ORDER)
    theta = conserved_along_flow(eta0, n_t0, dxx_S0, dx_n_t0)
    eps = 0.5 * float(np.min(z0 - w0))
    r0 = q0 = None
    if eps > 0.0:
        g = gradient_state_non(RiemannTriple(w0, z0, S0), dx_w, dx_z, eta0, eps, params)
        r0, q0 = g.r, g.q
    return DerivedInitial(
        model=model, x=data.x, w0=w0, z0=z0, S0=S0, dx_w=dx_w, dx_z=dx_z, vacuum=vacuum,
        eta0=eta0, dxx_S0=dxx_S0, n_t0=n_t0, dx_n_t0=dx_n_t0, theta=theta, eps=eps, r0=r0, q0=q0,
    )
