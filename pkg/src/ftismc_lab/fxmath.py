"""Fixed-time math primitives shared by the controllers and the analysis layer.

The signed power [x]^a = sign(x) * |x|^a is the odd-symmetric fractional power
that appears in every fixed-time law here; `fixed_time_bound` evaluates the
settling-time bound of the scalar system  ydot = -lambda1*[y]^a - lambda2*[y]^b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class FixedTimeGains:
    """Gains of the scalar fixed-time system ydot = -l1*[y]^alpha - l2*[y]^beta."""

    lambda1: float
    lambda2: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValueError("lambda1 and lambda2 must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.beta > 1.0:
            raise ValueError("beta must be > 1")


@njit(cache=True)
def _spow_s(x: float, a: float) -> float:
    if x > 0.0:
        return x**a
    if x < 0.0:
        return -((-x) ** a)
    return 0.0


@njit(cache=True)
def _spow(x, a):
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = _spow_s(x[i], a)
    return out


@njit(cache=True)
def _sgn(x: float, width: float) -> float:
    """sign(x) for width == 0, boundary-layer saturation otherwise."""
    if width > 0.0:
        r = x / width
        if r > 1.0:
            return 1.0
        if r < -1.0:
            return -1.0
        return r
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def signed_power(x, a):
    """Elementwise sign-preserving power sign(x_i)*|x_i|^a.

    Scalar input returns a scalar, array input an array of the same shape.
    """
    if not np.isfinite(a) or a <= 0:
        raise ValueError(f"exponent must be positive and finite, got {a}")
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("signed_power requires finite input")
    out = np.sign(arr) * np.abs(arr) ** float(a)
    if np.ndim(x) == 0:
        return float(out)
    return out


def fixed_time_bound(g: FixedTimeGains) -> float:
    """Settling-time upper bound 1/(l1*(1-alpha)) + 1/(l2*(beta-1)).

    The bound holds for every initial condition of the stable scalar system
    ydot = -lambda1*[y]^alpha - lambda2*[y]^beta.
    """
    return 1.0 / (g.lambda1 * (1.0 - g.alpha)) + 1.0 / (g.lambda2 * (g.beta - 1.0))


def saturated_sign(x: float, width: float) -> float:
    """clamp(x/width, -1, 1): continuous boundary-layer replacement for sign."""
    if width <= 0:
        raise ValueError(f"boundary layer width must be positive, got {width}")
    return float(_sgn(float(x), float(width)))


@njit(cache=True)
def _ft_scalar_settle(y0: float, l1: float, l2: float, alpha: float, beta: float,
                      dt: float, horizon: float, threshold: float) -> float:
    """Integrate ydot = -l1*[y]^alpha - l2*[y]^beta (RK4) and return the first
    time after which |y| stays below `threshold` until the horizon; -1.0 if never.
    """
    n = int(horizon / dt)
    y = y0
    t_settle = 0.0 if abs(y0) < threshold else -1.0
    for i in range(n):
        k1 = -l1 * _spow_s(y, alpha) - l2 * _spow_s(y, beta)
        y2 = y + 0.5 * dt * k1
        k2 = -l1 * _spow_s(y2, alpha) - l2 * _spow_s(y2, beta)
        y3 = y + 0.5 * dt * k2
        k3 = -l1 * _spow_s(y3, alpha) - l2 * _spow_s(y3, beta)
        y4 = y + dt * k3
        k4 = -l1 * _spow_s(y4, alpha) - l2 * _spow_s(y4, beta)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (i + 1) * dt
        if abs(y) < threshold:
            if t_settle < 0.0:
                t_settle = t
        else:
            t_settle = -1.0
    return t_settle


def scalar_settling_time(y0: float, g: FixedTimeGains, dt: float = 1e-5,
                         horizon: float | None = None,
                         threshold: float = 1e-6) -> float | None:
    """Empirical settling time of ydot = -l1*[y]^alpha - l2*[y]^beta from y0.

    Returns the first time after which |y| < threshold for the rest of the
    horizon (default horizon: the theoretical bound), or None if it never
    settles within the horizon.
    """
    if horizon is None:
        horizon = 1.5 * fixed_time_bound(g)
    t = _ft_scalar_settle(float(y0), g.lambda1, g.lambda2, g.alpha, g.beta,
                          dt, horizon, threshold)
    return None if t < 0.0 else t
