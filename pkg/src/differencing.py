"""Finite differences on functions and on sampled grids."""
from typing import Callable

import numpy as np


def fd_step(x: np.ndarray, relative: float = 1e-5, floor: float = 1e-8) -> np.ndarray:
    return np.maximum(floor, relative * np.abs(np.asarray(x, dtype=float)))


def central_difference(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: np.ndarray) -> np.ndarray:
    return (fun(x + h) - fun(x - h)) / (2.0 * h)


def richardson_difference(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Central difference with one Richardson step, O(h^4)."""
    coarse = central_difference(fun, x, h)
    fine = central_difference(fun, x, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def grid_gradient(values: np.ndarray, dx: float, periodic: bool, order: int = 2) -> np.ndarray:
    """d/dx of samples on a uniform grid; order 2 or 4 in the interior."""
    f = np.asarray(values, dtype=float)
    if order == 4:
        if periodic:
            return (-np.roll(f, -2) + 8.0 * np.roll(f, -1) - 8.0 * np.roll(f, 1) + np.roll(f, 2)) / (12.0 * dx)
        out = np.gradient(f, dx, edge_order=2)
        out[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * dx)
        return out
    if periodic:
        return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * dx)
    return np.gradient(f, dx, edge_order=2)


def grid_second_derivative(values: np.ndarray, dx: float, periodic: bool, order: int = 2) -> np.ndarray:
    f = np.asarray(values, dtype=float)
    if periodic:
        if order == 4:
            return (
                -np.roll(f, -2) + 16.0 * np.roll(f, -1) - 30.0 * f + 16.0 * np.roll(f, 1) - np.roll(f, 2)
            ) / (12.0 * dx ** 2)
        return (np.roll(f, -1) - 2.0 * f + np.roll(f, 1)) / dx ** 2
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / dx ** 2
    if order == 4 and f.size >= 5:
        out[2:-2] = (-f[4:] + 16.0 * f[3:-1] - 30.0 * f[2:-2] + 16.0 * f[1:-3] - f[:-4]) / (12.0 * dx ** 2)
    out[0] = out[1]
    out[-1] = out[-2]
    return out


def total_variation(values: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(np.asarray(values, dtype=float)))))
