"""Quadrature rules used by the Riemann-variable transforms and weights."""
import warnings
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, cumulative_trapezoid, quad

from .errors import NumericalError

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-13
DEFAULT_NODES = 48


def vacuum_regularized_integral(
    integrand: Callable[[float], float],
    upper: float,
    gamma: float,
    epsabs: float = QUAD_EPSABS,
    epsrel: float = QUAD_EPSREL,
    tolerance: float = 1e-10,
) -> float:
    """Adaptive Gauss-Kronrod quadrature of int_0^upper integrand(s) ds.

    The integrand may behave like s^((gamma-3)/2) at the origin; the substitution
    s = t^(2/(gamma-1)) makes it bounded before handing it to QUADPACK.
    """
    if upper <= 0.0:
        return 0.0
    p = 2.0 / (gamma - 1.0)
    t_upper = upper ** (1.0 / p)

    def transformed(t: float) -> float:
        return integrand(t ** p) * p * t ** (p - 1.0)

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, abserr = quad(transformed, 0.0, t_upper, epsabs=epsabs, epsrel=epsrel, limit=200)
        except IntegrationWarning as e:
            raise NumericalError("quadrature did not converge", {"upper": upper, "reason": str(e)})
    if abserr > tolerance * max(1.0, abs(value)):
        raise NumericalError("quadrature error estimate above tolerance", {"upper": upper, "abserr": abserr})
    return float(value)


def adaptive_integral(integrand: Callable[[float], float], lower: float, upper: float, tolerance: float = 1e-10) -> float:
    """Plain adaptive Gauss-Kronrod quadrature with convergence checking."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, abserr = quad(integrand, lower, upper, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
        except IntegrationWarning as e:
            raise NumericalError("quadrature did not converge", {"lower": lower, "upper": upper, "reason": str(e)})
    if abserr > tolerance * max(1.0, abs(value)):
        raise NumericalError("quadrature error estimate above tolerance", {"abserr": abserr})
    return float(value)


@lru_cache(maxsize=16)
def legendre_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    return np.polynomial.legendre.leggauss(nodes)


def gauss_legendre(
    integrand: Callable[[np.ndarray], np.ndarray],
    lower: np.ndarray,
    upper: np.ndarray,
    nodes: int = DEFAULT_NODES,
) -> np.ndarray:
    """Fixed-order rule applied to many intervals at once.

    `integrand` receives an array of shape lower.shape + (nodes,) holding the
    abscissae and must return values of the same shape.
    """
    t, wts = legendre_rule(nodes)
    lo = np.asarray(lower, dtype=float)[..., None]
    hi = np.asarray(upper, dtype=float)[..., None]
    half = 0.5 * (hi - lo)
    x = lo + half * (t + 1.0)
    return np.sum(integrand(x) * wts * half, axis=-1)


def composite_gauss_legendre(
    integrand: Callable[[np.ndarray], np.ndarray],
    lower: np.ndarray,
    upper: np.ndarray,
    nodes: int = 24,
    panels: int = 8,
) -> np.ndarray:
    """`gauss_legendre` on `panels` equal sub-intervals of each interval."""
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    width = (hi - lo) / panels
    total = np.zeros(np.broadcast(lo, hi).shape)
    for i in range(panels):
        total = total + gauss_legendre(integrand, lo + i * width, lo + (i + 1) * width, nodes)
    return total


def sqrt_endpoint_rule(
    integrand: Callable[[np.ndarray], np.ndarray],
    lower: np.ndarray,
    upper: np.ndarray,
    nodes: int = DEFAULT_NODES,
) -> np.ndarray:
    """Gauss-Legendre after x = lower + (upper-lower) s^2, for fractional-power zeros at `lower`."""
    lo = np.asarray(lower, dtype=float)
    width = np.asarray(upper, dtype=float) - lo

    def in_s(s: np.ndarray) -> np.ndarray:
        x = lo[..., None] + width[..., None] * s * s
        return integrand(x) * 2.0 * width[..., None] * s

    return gauss_legendre(in_s, np.zeros_like(lo), np.ones_like(lo), nodes)


def composite_trapezoid(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid integral starting at zero."""
    return cumulative_trapezoid(values, times, initial=0.0)
