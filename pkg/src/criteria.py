"""Static blow-up classifiers on initial data.

The barotropic law gets the global-versus-finite-time dichotomy decided by the
signs of the weighted gradients xi0, zeta0. The full law gets the sufficient
strong-compression test r0 < -N1 or q0 < -N2.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .differencing import grid_gradient
from .eos import GasParams
from .errors import InvalidInputError, NumericalError, SingularWeightError
from .isentropic import RiemannPairIso, from_riemann_iso, quantity_Y, riccati_coefficients, sonic_gap, to_riemann_iso
from .profiles import DERIVATIVE_ORDER, DerivedInitial, InitialData, derive_initial
from .thresholds import CriteriaConstants, ThresholdReport, constants_226, psi_Psi_K, thresholds_N1_N2

NEUTRAL_RELATIVE = 1e-12
SEGMENT_POINTS = 65
BISECTION_RELATIVE = 1e-3

GLOBAL = "global"
FINITE_TIME = "finite-time"
OUTSIDE = "outside-theory"
GUARANTEED = "blow-up guaranteed"
INCONCLUSIVE = "inconclusive"


@dataclass
class CriteriaReport:
    model: str
    x: np.ndarray
    assumptions: Dict[str, Dict[str, Any]]
    forward: np.ndarray
    backward: np.ndarray
    iso_verdict: Optional[str] = None
    noniso_verdict: Optional[str] = None
    witness: Optional[Dict[str, Any]] = None
    informal_compression: Optional[bool] = None
    predicted_window: Optional[Dict[str, Any]] = None
    thresholds: Optional[Dict[str, Any]] = None
    constants: Optional[Dict[str, Any]] = None
    pointwise: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return self.iso_verdict if self.model == "isentropic" else self.noniso_verdict

    @property
    def outside_theory(self) -> bool:
        return self.verdict == OUTSIDE

    def label_counts(self) -> Dict[str, Dict[str, int]]:
        return {
            side: {label: int(np.count_nonzero(labels == label)) for label in ("R", "C", "N")}
            for side, labels in (("forward", self.forward), ("backward", self.backward))
        }

    def as_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "verdict": self.verdict,
            "iso_verdict": self.iso_verdict,
            "noniso_verdict": self.noniso_verdict,
            "assumptions": self.assumptions,
            "characters": self.label_counts(),
            "witness": self.witness,
            "informal_compression": self.informal_compression,
            "predicted_window": self.predicted_window,
            "thresholds": self.thresholds,
            "constants": self.constants,
        }

    def labels_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"x": self.x, "forward": self.forward, "backward": self.backward})
        for name, values in self.pointwise.items():
            frame[name] = values
        return frame


def _check(value: float, bound: float, margin: float) -> Dict[str, Any]:
    return {"holds": bool(margin > 0.0), "value": float(value), "bound": float(bound), "margin": float(margin)}


def rc_labels(gradient: np.ndarray) -> np.ndarray:
    """'R' where the gradient is positive, 'C' where negative, 'N' within round-off of zero."""
    g = np.asarray(gradient, dtype=float)
    tol = NEUTRAL_RELATIVE * max(float(np.max(np.abs(g))), np.finfo(float).tiny)
    return np.where(g > tol, "R", np.where(g < -tol, "C", "N"))


def _rho_of(w: np.ndarray, z: np.ndarray, params: GasParams) -> np.ndarray:
    return np.asarray(from_riemann_iso(RiemannPairIso(w, z), params)[0])


def _segment_window(
    frozen: float, start: float, lo: float, hi: float, gradient0: float, family: int, params: GasParams
) -> Optional[Dict[str, float]]:
    """Bounds on the blow-up time of one compressive point from the coefficient range on its frozen segment."""
    free = np.linspace(lo, hi, SEGMENT_POINTS)
    if family == 1:
        w, z = np.full_like(free, frozen), free
    else:
        w, z = free, np.full_like(free, frozen)
    gap = z - w
    keep = (gap > 0.0) & (gap < sonic_gap(params))
    if not np.any(keep):
        return None
    w, z = w[keep], z[keep]
    k1, k2 = riccati_coefficients(w, z, params)
    kappa = k1 if family == 1 else k2
    ratio = kappa / quantity_Y(_rho_of(w, z, params), params)
    Cg = float(max(ratio.max(), 1.0 / ratio.min()))
    w0, z0 = (frozen, start) if family == 1 else (start, frozen)
    Y0 = float(quantity_Y(_rho_of(np.array([w0]), np.array([z0]), params), params)[0])
    if params.gamma >= 3.0:
        band = -Cg / gradient0
    else:
        band = float(np.expm1(-Cg ** 2 / gradient0) / (Cg * Y0))
    return {
        "lower": -1.0 / (gradient0 * float(kappa.max())),
        "upper": -1.0 / (gradient0 * float(kappa.min())),
        "band_upper": band,
        "Cg": Cg,
    }


def blowup_window_iso(derived: DerivedInitial, params: GasParams) -> Optional[Dict[str, Any]]:
    """Earliest-blow-up window over all compressive points.

    Along a 1-characteristic w stays at w0(x0) and z stays in [inf z0, sup z0],
    so bounding e^{-h1} dw_lambda1 there brackets the zero of 1 + xi0 int(...).
    Family 2 is handled with zeta and the roles of w and z exchanged.
    """
    windows = []
    live = ~derived.vacuum
    for family, grad, frozen, free in (
        (1, derived.xi0, derived.w0, derived.z0),
        (2, derived.zeta0, derived.z0, derived.w0),
    ):
        lo, hi = float(free[live].min()), float(free[live].max())
        for i in np.flatnonzero(live & (grad < 0.0)):
            window = _segment_window(float(frozen[i]), float(free[i]), lo, hi, float(grad[i]), family, params)
            if window is not None:
                windows.append(dict(window, family=family, x=float(derived.x[i]), gradient0=float(grad[i])))
    if not windows:
        return None
    best = dict(min(windows, key=lambda wdw: wdw["upper"]))
    best["lower"] = min(wdw["lower"] for wdw in windows)
    best["points"] = len(windows)
    return best


def classify_iso(data: InitialData, params: GasParams, rho_floor: float = 1e-12, derived: Optional[DerivedInitial] = None) -> CriteriaReport:
    if derived is None:
        pair = to_riemann_iso(data.rho, data.u, params)
        w0, z0 = np.asarray(pair.w), np.asarray(pair.z)
    else:
        w0, z0 = derived.w0, derived.z0
    gap = z0 - w0
    spread = float(z0.max() - w0.min())
    assumptions = {
        "gap_positive": _check(float(gap.min()), 0.0, float(gap.min())),
        "sonic_bound": _check(spread, sonic_gap(params), sonic_gap(params) - spread),
    }
    if not all(a["holds"] for a in assumptions.values()):
        # weights are undefined outside the assumptions; report the labels only
        def grad(f: np.ndarray) -> np.ndarray:
            return grid_gradient(f, data.dx, data.periodic, order=DERIVATIVE_ORDER)

        return CriteriaReport(
            model="isentropic",
            x=data.x,
            assumptions=assumptions,
            forward=rc_labels(grad(z0)),
            backward=rc_labels(grad(w0)),
            iso_verdict=OUTSIDE,
            pointwise={"w0": w0, "z0": z0},
        )

    derived = derived or derive_initial(data, params, "isentropic", rho_floor)
    live = ~derived.vacuum
    report = CriteriaReport(
        model="isentropic",
        x=derived.x,
        assumptions=assumptions,
        forward=rc_labels(derived.dx_z),
        backward=rc_labels(derived.dx_w),
        pointwise={"w0": derived.w0, "z0": derived.z0, "xi0": derived.xi0, "zeta0": derived.zeta0},
    )

    xi, zeta = derived.xi0[live], derived.zeta0[live]
    tol = NEUTRAL_RELATIVE * max(float(np.max(np.abs(xi))), float(np.max(np.abs(zeta))), np.finfo(float).tiny)
    low = min(float(xi.min()), float(zeta.min()))
    report.informal_compression = low < -tol
    if low >= -tol:
        report.iso_verdict = GLOBAL
        return report
    report.iso_verdict = FINITE_TIME
    family = 1 if xi.min() <= zeta.min() else 2
    values = derived.xi0 if family == 1 else derived.zeta0
    i = int(np.argmin(np.where(live, values, np.inf)))
    report.witness = {"family": family, "x": float(derived.x[i]), "value": float(values[i])}
    report.predicted_window = blowup_window_iso(derived, params)
    return report


def _assumption_checks(derived: DerivedInitial, params: GasParams, constants: Optional[CriteriaConstants]) -> Dict[str, Dict[str, Any]]:
    sup_S = float(np.max(np.abs(derived.S0)))
    checks = {
        "gap_positive": _check(2.0 * derived.eps, 0.0, 2.0 * derived.eps),
        "entropy_bound": _check(sup_S, params.B, params.B - sup_S + 1e-12 * max(1.0, params.B)),
    }
    if constants is not None:
        checks["subluminal_box"] = _check(constants.assumption_value, params.c, constants.assumption_margin)
    return checks


def noniso_thresholds(
    derived: DerivedInitial,
    params: GasParams,
    grid_points: int = 33,
    gap_floor_fraction: float = 0.5,
    refine: bool = True,
    max_starts: int = 5,
    entropy_samples: int = 257,
    periodic: bool = False,
) -> Tuple[CriteriaConstants, Optional[ThresholdReport]]:
    """Box constants and, when the box stays subluminal, N1 and N2 for the data's theta bounds."""
    if derived.eps is None or not derived.eps > 0.0:
        raise SingularWeightError("initial data touch vacuum; the weights need inf(z0 - w0) > 0")
    bounds = psi_Psi_K(params, samples=entropy_samples)
    constants = constants_226(derived.w0, derived.z0, derived.S0, params, bounds, periodic=periodic)
    if not constants.assumption_holds:
        return constants, None
    T1 = float(np.max(np.abs(derived.theta.theta1)))
    T2 = float(np.max(np.abs(derived.theta.theta2)))
    report = thresholds_N1_N2(
        params, constants.max_w, constants.max_z, (T1, T2), derived.eps,
        grid_points=grid_points, gap_floor_fraction=gap_floor_fraction, refine=refine, max_starts=max_starts,
    )
    return replace(constants, N1=report.N1, N2=report.N2), report


def classify_noniso(
    data: InitialData,
    params: GasParams,
    rho_floor: float = 1e-12,
    derived: Optional[DerivedInitial] = None,
    **threshold_options: Any,
) -> CriteriaReport:
    derived = derived or derive_initial(data, params, "full", rho_floor)
    if derived.eps is None or not derived.eps > 0.0:
        raise SingularWeightError(
            f"eps = {derived.eps}: the data reach vacuum and the strong-compression test does not apply"
        )
    constants, thresholds = noniso_thresholds(derived, params, periodic=data.periodic, **threshold_options)
    report = CriteriaReport(
        model="full",
        x=derived.x,
        assumptions=_assumption_checks(derived, params, constants),
        forward=rc_labels(derived.dx_z),
        backward=rc_labels(derived.dx_w),
        constants=constants.as_dict(),
        pointwise={
            "w0": derived.w0, "z0": derived.z0, "S0": derived.S0, "r0": derived.r0, "q0": derived.q0,
            "theta1": derived.theta.theta1, "theta2": derived.theta.theta2,
        },
    )
    report.informal_compression = bool(np.any(derived.r0 < 0.0) or np.any(derived.q0 < 0.0))
    if thresholds is None or not all(a["holds"] for a in report.assumptions.values()):
        report.noniso_verdict = OUTSIDE
        return report

    report.thresholds = {"N1": thresholds.N1, "N2": thresholds.N2, "certificate": thresholds.certificate}
    i_r, i_q = int(np.argmin(derived.r0)), int(np.argmin(derived.q0))
    margin_r = float(derived.r0[i_r]) + thresholds.N1
    margin_q = float(derived.q0[i_q]) + thresholds.N2
    if margin_r <= margin_q:
        report.witness = {"family": "r", "x": float(derived.x[i_r]), "value": float(derived.r0[i_r]), "margin": margin_r}
    else:
        report.witness = {"family": "q", "x": float(derived.x[i_q]), "value": float(derived.q0[i_q]), "margin": margin_q}
    report.noniso_verdict = GUARANTEED if min(margin_r, margin_q) < 0.0 else INCONCLUSIVE
    return report


def classify(data: InitialData, params: GasParams, model: str, rho_floor: float = 1e-12, **threshold_options: Any) -> CriteriaReport:
    if model == "isentropic":
        return classify_iso(data, params, rho_floor)
    if model == "full":
        return classify_noniso(data, params, rho_floor, **threshold_options)
    raise InvalidInputError(f"unknown model {model!r}")


@dataclass(frozen=True)
class CalibrationResult:
    flip: float
    scale: float
    capped: bool
    iterations: int
    samples: List[Tuple[float, float]]

    def as_dict(self) -> Dict[str, Any]:
        return {"flip": self.flip, "scale": self.scale, "capped": self.capped,
                "iterations": self.iterations, "samples": [list(s) for s in self.samples]}


def compression_margin(data: InitialData, params: GasParams, rho_floor: float = 1e-12, **threshold_options: Any) -> float:
    """min(min r0 + N1, min q0 + N2); negative exactly when blow-up is guaranteed."""
    derived = derive_initial(data, params, "full", rho_floor)
    if derived.eps is None or not derived.eps > 0.0:
        raise SingularWeightError("initial data touch vacuum")
    constants, report = noniso_thresholds(derived, params, periodic=data.periodic, **threshold_options)
    if report is None:
        raise NumericalError("threshold box leaves the subluminal region during calibration",
                             {"assumption_value": constants.assumption_value})
    return min(float(derived.r0.min()) + report.N1, float(derived.q0.min()) + report.N2)


def calibrate_compression_scale(
    build: Callable[[float], InitialData],
    params: GasParams,
    s_max: float,
    margin: float = 1.25,
    s_min: float = 0.0,
    rho_floor: float = 1e-12,
    **threshold_options: Any,
) -> CalibrationResult:
    """Bisect the scale at which the compression family first guarantees blow-up.

    `build(s)` returns the data at scale s; s_max is the largest scale whose
    data stay subluminal. The returned scale is margin times the flip, capped at s_max.
    """
    samples: List[Tuple[float, float]] = []

    def f(s: float) -> float:
        value = compression_margin(build(s), params, rho_floor, **threshold_options)
        samples.append((s, value))
        return value

    lo, hi = s_min, s_max
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo > 0.0 and f_hi < 0.0):
        raise NumericalError(
            "compression scale is not bracketed",
            {"s_min": lo, "s_max": hi, "margin_at_min": f_lo, "margin_at_max": f_hi},
        )
    iterations = 0
    while hi - lo > BISECTION_RELATIVE * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            hi = mid
        else:
            lo = mid
        iterations += 1
    flip = 0.5 * (lo + hi)
    scale = min(margin * flip, s_max)
    return CalibrationResult(flip=flip, scale=scale, capped=scale < margin * flip, iterations=iterations, samples=samples)
