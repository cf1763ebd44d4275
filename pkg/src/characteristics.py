"""Characteristic curves traced through a stored solver history."""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from .differencing import grid_gradient
from .eos import GasParams
from .errors import InvalidInputError
from .isentropic import gradient_state, quantity_Y, riccati_coefficients
from .nonisentropic import RiemannTriple, conserved_along_flow, gradient_state_non, lemma48_derivatives, weights_h_g_L_M
from .quadrature import composite_trapezoid
from .solver import FieldSnapshot, RunHistory, make_law

FAMILIES = {"isentropic": (1, 2), "full": (1, 2, 3)}
_SAMPLED = ("rho", "u", "S", "w", "z", "dxw", "dxz", "dxS", "dxxS", "n_t", "dx_n_t")


@dataclass
class CharTrace:
    """Samples of one characteristic at the snapshot times it survived.

    `x` is unwrapped on periodic domains. `quantities` holds the along-path
    fields: xi, zeta, Y for the barotropic law, r, q, theta1, theta2 for the
    full one, plus the Riccati coefficient and its running integral.
    """
    family: int
    model: str
    t: np.ndarray
    x: np.ndarray
    w: np.ndarray
    z: np.ndarray
    quantities: Dict[str, np.ndarray] = field(default_factory=dict)
    truncated: bool = False

    def drift(self, name: str) -> float:
        values = self.w if name == "w" else self.z if name == "z" else self.quantities[name]
        return float(np.nanmax(np.abs(values - values[0])))

    def as_frame(self) -> pd.DataFrame:
        cols = ["rho", "u"]
        cols += ["xi", "zeta", "Y"] if self.model == "isentropic" else ["S", "r", "q", "theta1", "theta2"]
        frame = pd.DataFrame({"t": self.t, "x": self.x})
        for name in cols[:2]:
            frame[name] = self.quantities[name]
        frame["w"] = self.w
        frame["z"] = self.z
        for name in cols[2:]:
            frame[name] = self.quantities.get(name, np.full(self.t.size, np.nan))
        frame["cumulative_integral"] = self.quantities["cumulative_integral"]
        return frame


def family_speeds(snap: FieldSnapshot, model: str, params: GasParams) -> Dict[int, np.ndarray]:
    """Characteristic speeds per cell; the full model numbers them lambda1 = u, lambda2 = fast, lambda3 = slow."""
    law = make_law(model, params)
    c2 = params.c ** 2
    u = snap.u
    cs = law.sound_speed(snap.nu, snap.S)
    slow = (u - cs) / (1.0 - u * cs / c2)
    fast = (u + cs) / (1.0 + u * cs / c2)
    if model == "isentropic":
        return {1: slow, 2: fast}
    return {1: u.copy(), 2: fast, 3: slow}


class _HistoryField:
    """Bilinear (t, x) interpolation of per-snapshot cell data."""

    def __init__(self, history: RunHistory, family: int):
        snaps = history.snapshots
        self.t = history.times
        self.xc = snaps[0].x
        self.dx = history.dx
        self.periodic = history.periodic
        self.lo = float(self.xc[0] - 0.5 * self.dx)
        self.hi = float(self.xc[-1] + 0.5 * self.dx)
        self.period = self.hi - self.lo if self.periodic else None
        self.speed = np.stack([family_speeds(s, history.model, history.params)[family] for s in snaps])
        c = history.params.c
        fields: Dict[str, List[np.ndarray]] = {name: [] for name in _SAMPLED}
        for s in snaps:
            n_t = c * s.nu / np.sqrt(c * c - s.u ** 2)
            values = {
                "rho": s.rho, "u": s.u, "S": s.S, "w": s.w, "z": s.z,
                "dxw": s.grads["dxw"], "dxz": s.grads["dxz"], "dxS": s.grads["dxS"], "dxxS": s.grads["dxxS"],
                "n_t": n_t, "dx_n_t": grid_gradient(n_t, self.dx, self.periodic),
            }
            for name in _SAMPLED:
                fields[name].append(values[name])
        self.fields = {name: np.stack(v) for name, v in fields.items()}

    def inside(self, x: float) -> bool:
        return self.periodic or self.lo <= x <= self.hi

    def _space(self, row: np.ndarray, x: float) -> float:
        return float(np.interp(x, self.xc, row, period=self.period))

    def at(self, data: np.ndarray, t: float, x: float) -> float:
        j = int(np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, len(self.t) - 2))
        t0, t1 = self.t[j], self.t[j + 1]
        theta = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        return (1.0 - theta) * self._space(data[j], x) + theta * self._space(data[j + 1], x)

    def sample(self, j: int, x: float) -> Dict[str, float]:
        return {name: self._space(v[j], x) for name, v in self.fields.items()}


def trace_characteristic(
    history: RunHistory,
    family: int,
    x0: float,
    params: Optional[GasParams] = None,
    substeps: int = 4,
    eps: Optional[float] = None,
) -> CharTrace:
    """Heun integration of dx/dt = lambda_family through the stored snapshots.

    The path is advanced `substeps` times per snapshot interval with the field
    interpolated linearly in time and space. Leaving an outflow domain ends the
    trace with `truncated` set.
    """
    params = params or history.params
    if family not in FAMILIES[history.model]:
        raise InvalidInputError(f"family {family} does not exist for the {history.model} model")
    if len(history.snapshots) < 2:
        raise InvalidInputError("tracing needs at least two snapshots")
    hf = _HistoryField(history, family)
    if not hf.inside(x0):
        raise InvalidInputError(f"x0 = {x0} lies outside the domain")

    xs = [float(x0)]
    samples = [hf.sample(0, x0)]
    truncated = False
    x = float(x0)
    for j in range(len(hf.t) - 1):
        h = (hf.t[j + 1] - hf.t[j]) / substeps
        for i in range(substeps):
            t = hf.t[j] + i * h
            k1 = hf.at(hf.speed, t, x)
            k2 = hf.at(hf.speed, t + h, x + h * k1)
            x = x + 0.5 * h * (k1 + k2)
            if not hf.inside(x):
                truncated = True
                break
        if truncated:
            break
        xs.append(x)
        samples.append(hf.sample(j + 1, x))

    t_path = hf.t[: len(xs)]
    along = {name: np.array([s[name] for s in samples]) for name in _SAMPLED}
    quantities = _path_quantities(history.model, family, along, params, eps if eps is not None else _data_eps(history))
    quantities["cumulative_integral"] = composite_trapezoid(quantities["coefficient"], t_path)
    return CharTrace(
        family=family, model=history.model, t=t_path, x=np.array(xs),
        w=along["w"], z=along["z"], quantities=quantities, truncated=truncated,
    )


def _data_eps(history: RunHistory) -> float:
    first = history.snapshots[0]
    return 0.5 * float(np.min(first.z - first.w))


def _path_quantities(model: str, family: int, along: Dict[str, np.ndarray], params: GasParams, eps: float) -> Dict[str, np.ndarray]:
    w, z = along["w"], along["z"]
    out = {"rho": along["rho"], "u": along["u"], "S": along["S"]}
    if model == "isentropic":
        live = (z - w > 0.0) & (along["rho"] > 0.0)
        for name in ("xi", "zeta", "Y", "coefficient"):
            out[name] = np.full(w.size, np.nan)
        if np.any(live):
            g = gradient_state(w[live], z[live], along["dxw"][live], along["dxz"][live], params)
            k1, k2 = riccati_coefficients(w[live], z[live], params)
            out["xi"][live], out["zeta"][live] = g.xi, g.zeta
            out["Y"][live] = quantity_Y(along["rho"][live], params)
            out["coefficient"][live] = k2 if family == 2 else k1
        return out

    theta = conserved_along_flow(along["dxS"], along["n_t"], along["dxxS"], along["dx_n_t"])
    out["theta1"], out["theta2"] = theta.theta1, theta.theta2
    out["r"] = np.full(w.size, np.nan)
    out["q"] = np.full(w.size, np.nan)
    out["coefficient"] = np.zeros(w.size)
    if eps > 0.0 and np.all(z - w > 0.0):
        triple = RiemannTriple(w, z, along["S"])
        weights = weights_h_g_L_M(triple, params, eps)
        g = gradient_state_non(triple, along["dxw"], along["dxz"], along["dxS"], eps, params, weights)
        out["r"], out["q"] = g.r, g.q
        d = lemma48_derivatives(triple, params)
        if family == 3:
            out["coefficient"] = d["lambda3"]["dw"] * np.exp(-weights.h)
        elif family == 2:
            out["coefficient"] = d["lambda2"]["dz"] * np.exp(-weights.g)
    return out


def trace_many(history: RunHistory, seeds: Iterable[float], families: Optional[Sequence[int]] = None, **kwargs) -> List[CharTrace]:
    families = families or FAMILIES[history.model]
    return [trace_characteristic(history, fam, float(x0), **kwargs) for fam in families for x0 in seeds]


def count_crossings(a: CharTrace, b: CharTrace) -> int:
    """Sign changes of x_a - x_b over the common sample times."""
    n = min(a.t.size, b.t.size)
    diff = a.x[:n] - b.x[:n]
    signs = np.sign(diff[diff != 0.0])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def max_pair_crossings(traces_a: Sequence[CharTrace], traces_b: Sequence[CharTrace]) -> int:
    return max((count_crossings(a, b) for a in traces_a for b in traces_b), default=0)
