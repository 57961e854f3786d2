"""Admittance trajectory shaping.

A virtual mass-spring-damper per Cartesian axis turns the measured external
force into an offset xi = xr - xd on top of the desired trajectory, so the
arm yields to contact instead of rejecting it.  The offset is integrated as
part of the global ODE state so the shaped reference and its derivatives stay
consistent with the controller's use of the reference acceleration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

TRAJECTORY_RADIUS = 0.14
TRAJECTORY_RATE = 0.5


@dataclass(frozen=True)
class AdmittanceParams:
    """Virtual mass / damping / stiffness per axis (same value on both axes)."""

    km: float = 20.0
    kb: float = 20.0
    kk: float = 100.0

    def __post_init__(self):
        if not (self.km > 0 and self.kb > 0 and self.kk > 0):
            raise ValueError("admittance coefficients must be strictly positive")


@dataclass
class AdmittanceState:
    """Offset xi = xr - xd and its velocity, per axis."""

    xi: np.ndarray
    xid: np.ndarray

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float).reshape(2)
        self.xid = np.asarray(self.xid, dtype=float).reshape(2)
        if not (np.all(np.isfinite(self.xi)) and np.all(np.isfinite(self.xid))):
            raise ValueError("admittance state must be finite")


@dataclass(frozen=True)
class ForceProfile:
    """Piecewise cosine ramp-in / plateau / ramp-out human force per axis."""

    amplitude: tuple = (1.0, 1.0)
    t_on: float = 10.0
    t_full: float = 11.0
    t_rampdown: float = 20.0
    t_off: float = 21.0

    def __post_init__(self):
        if not self.t_on < self.t_full < self.t_rampdown < self.t_off:
            raise ValueError("force profile breakpoints must be strictly increasing")


@dataclass
class Reference:
    """Shaped reference position / velocity / acceleration at one instant."""

    xr: np.ndarray
    xrd: np.ndarray
    xrdd: np.ndarray


@njit(cache=True)
def _desired(t: float):
    """Circle xd = R(cos(w t), sin(w t)) and its analytic derivatives."""
    w = TRAJECTORY_RATE
    r = TRAJECTORY_RADIUS
    c = np.cos(w * t)
    s = np.sin(w * t)
    pos = np.array([r * c, r * s])
    vel = np.array([-r * w * s, r * w * c])
    acc = np.array([-r * w * w * c, -r * w * w * s])
    return pos, vel, acc


@njit(cache=True)
def _human_force(t, a1, a2, t_on, t_full, t_rampdown, t_off):
    out = np.empty(2)
    if t < t_on or t >= t_off:
        scale = 0.0
    elif t < t_full:
        scale = 1.0 - np.cos(np.pi * t)
    elif t < t_rampdown:
        scale = 2.0
    else:
        scale = 1.0 + np.cos(np.pi * t)
    out[0] = a1 * scale
    out[1] = a2 * scale
    return out


@njit(cache=True)
def _admittance_accel(xi, xid, fe, km, kb, kk):
    out = np.empty(2)
    out[0] = (fe[0] - kb * xid[0] - kk * xi[0]) / km
    out[1] = (fe[1] - kb * xid[1] - kk * xi[1]) / km
    return out


def desired_trajectory(t: float):
    """(position, velocity, acceleration) of the desired circular trajectory."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return _desired(float(t))


def human_force(t: float, fp: ForceProfile = ForceProfile()) -> np.ndarray:
    """External human force at time t; continuous across all breakpoints."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return _human_force(float(t), fp.amplitude[0], fp.amplitude[1],
                        fp.t_on, fp.t_full, fp.t_rampdown, fp.t_off)


def admittance_accel(s: AdmittanceState, fe, p: AdmittanceParams) -> np.ndarray:
    """Offset acceleration (fe - kb*xid - kk*xi) / km."""
    fe = np.asarray(fe, dtype=float).reshape(2)
    return _admittance_accel(s.xi, s.xid, fe, p.km, p.kb, p.kk)


def reference(t: float, s: AdmittanceState, fe, p: AdmittanceParams) -> Reference:
    """Shaped reference: desired trajectory plus the compliance offset."""
    pos, vel, acc = desired_trajectory(t)
    return Reference(xr=pos + s.xi, xrd=vel + s.xid,
                     xrdd=acc + admittance_accel(s, fe, p))
