"""Two-link planar manipulator model.

Joint-space matrices M, C, G, the bounded disturbance F, the Jacobian and its
time derivative, forward kinematics/dynamics, and the Cartesian-space model
(Mx, Cx, Gx, Fx, Xi = Mx^-1, Gamma = Mx^-1(-Cx*xdot - Gx)) used by the
Cartesian controllers.

All 2x2 inverses are closed-form (adjugate / determinant) so runs are
bit-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

DEFAULT_SINGULARITY_TOL = 1e-6


class SingularityError(RuntimeError):
    """Raised when the Jacobian is too close to singular to invert."""

    def __init__(self, det_j: float, tol: float):
        super().__init__(f"Jacobian near singular: |det J| = {abs(det_j):.3e} < {tol:.1e}")
        self.det_j = det_j
        self.tol = tol


@dataclass(frozen=True)
class RobotParams:
    """Masses (kg), link lengths (m) and gravity constant (m/s^2) of the arm."""

    m1: float = 1.5
    m2: float = 1.0
    l1: float = 0.3
    l2: float = 0.3
    g: float = 9.81

    def __post_init__(self):
        if not (self.m1 > 0 and self.m2 > 0):
            raise ValueError("masses must be strictly positive")
        if not (self.l1 > 0 and self.l2 > 0):
            raise ValueError("link lengths must be strictly positive")
        if self.g < 0:
            raise ValueError("gravity constant must be >= 0")


@dataclass
class JointState:
    """Joint angles (rad) and velocities (rad/s), length-2 each."""

    q: np.ndarray
    qd: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).reshape(2)
        self.qd = np.asarray(self.qd, dtype=float).reshape(2)
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.qd))):
            raise ValueError("joint state must be finite")


@dataclass
class CartesianModel:
    """Cartesian-space matrices at one configuration."""

    Mx: np.ndarray
    Cx: np.ndarray
    Gx: np.ndarray
    Fx: np.ndarray
    Xi: np.ndarray
    Gamma: np.ndarray
    J: np.ndarray
    det_j: float


# ---------------------------------------------------------------------------
# jitted kernels (also called from the simulation hot loop)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _inv2(a):
    """Closed-form 2x2 inverse; returns (inverse, determinant)."""
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    inv = np.empty((2, 2))
    inv[0, 0] = a[1, 1] / det
    inv[0, 1] = -a[0, 1] / det
    inv[1, 0] = -a[1, 0] / det
    inv[1, 1] = a[0, 0] / det
    return inv, det


@njit(cache=True)
def _mass(m1, m2, l1, l2, q2):
    c2 = np.cos(q2)
    m = np.empty((2, 2))
    m[0, 0] = m2 * l2 * l2 + 2.0 * m2 * l1 * l2 * c2 + (m1 + m2) * l1 * l1
    m[0, 1] = m2 * l2 * l2 + m2 * l1 * l2 * c2
    m[1, 0] = m[0, 1]
    m[1, 1] = m2 * l2 * l2
    return m


@njit(cache=True)
def _coriolis(m2, l1, l2, q2, qd1, qd2):
    # C12 carries the qd2 factor so that C @ qd reproduces the velocity
    # terms [-m2 l1 l2 s2 qd2^2 - 2 m2 l1 l2 s2 qd1 qd2 ; m2 l1 l2 s2 qd1^2].
    h = m2 * l1 * l2 * np.sin(q2)
    c = np.empty((2, 2))
    c[0, 0] = -2.0 * h * qd2
    c[0, 1] = -h * qd2
    c[1, 0] = h * qd1
    c[1, 1] = 0.0
    return c


@njit(cache=True)
def _gravity(m1, m2, l1, l2, g, q1, q2):
    c1 = np.cos(q1)
    c12 = np.cos(q1 + q2)
    out = np.empty(2)
    out[0] = m2 * l2 * g * c12 + (m1 + m2) * l1 * g * c1
    out[1] = m2 * l2 * g * c12
    return out


@njit(cache=True)
def _disturbance(q1, q2):
    c1 = np.cos(q1)
    s2 = np.sin(q2)
    out = np.empty(2)
    out[0] = 2.0 * c1 * s2 + 5.0 * c1 * c1
    out[1] = -out[0]
    return out


@njit(cache=True)
def _jacobian(l1, l2, q1, q2):
    s1 = np.sin(q1)
    c1 = np.cos(q1)
    s12 = np.sin(q1 + q2)
    c12 = np.cos(q1 + q2)
    j = np.empty((2, 2))
    j[0, 0] = -l1 * s1 - l2 * s12
    j[0, 1] = -l2 * s12
    j[1, 0] = l1 * c1 + l2 * c12
    j[1, 1] = l2 * c12
    return j


@njit(cache=True)
def _jacobian_dot(l1, l2, q1, q2, qd1, qd2):
    s1 = np.sin(q1)
    c1 = np.cos(q1)
    s12 = np.sin(q1 + q2)
    c12 = np.cos(q1 + q2)
    w = qd1 + qd2
    jd = np.empty((2, 2))
    jd[0, 0] = -l1 * c1 * qd1 - l2 * c12 * w
    jd[0, 1] = -l2 * c12 * w
    jd[1, 0] = -l1 * s1 * qd1 - l2 * s12 * w
    jd[1, 1] = -l2 * s12 * w
    return jd


@njit(cache=True)
def _fk(l1, l2, q1, q2):
    out = np.empty(2)
    out[0] = l1 * np.cos(q1) + l2 * np.cos(q1 + q2)
    out[1] = l1 * np.sin(q1) + l2 * np.sin(q1 + q2)
    return out


@njit(cache=True)
def _forward_dyn(m1, m2, l1, l2, g, q1, q2, qd1, qd2, tau_c, tau_e, dist_on):
    m = _mass(m1, m2, l1, l2, q2)
    c = _coriolis(m2, l1, l2, q2, qd1, qd2)
    grav = _gravity(m1, m2, l1, l2, g, q1, q2)
    rhs = np.empty(2)
    rhs[0] = tau_c[0] + tau_e[0] - (c[0, 0] * qd1 + c[0, 1] * qd2) - grav[0]
    rhs[1] = tau_c[1] + tau_e[1] - (c[1, 0] * qd1 + c[1, 1] * qd2) - grav[1]
    if dist_on:
        f = _disturbance(q1, q2)
        rhs[0] -= f[0]
        rhs[1] -= f[1]
    minv, _ = _inv2(m)
    return minv @ rhs


@njit(cache=True)
def _cartesian(m1, m2, l1, l2, g, q1, q2, qd1, qd2, dist_on):
    """Cartesian model pieces (Mx, Cx, Gx, Fx, J, det J) at one state."""
    j = _jacobian(l1, l2, q1, q2)
    jinv, det_j = _inv2(j)
    jinv_t = jinv.T
    m = _mass(m1, m2, l1, l2, q2)
    c = _coriolis(m2, l1, l2, q2, qd1, qd2)
    jd = _jacobian_dot(l1, l2, q1, q2, qd1, qd2)
    mx = jinv_t @ (m @ jinv)
    cx = jinv_t @ ((c - m @ (jinv @ jd)) @ jinv)
    gx = jinv_t @ _gravity(m1, m2, l1, l2, g, q1, q2)
    if dist_on:
        fx = jinv_t @ _disturbance(q1, q2)
    else:
        fx = np.zeros(2)
    return mx, cx, gx, fx, j, det_j


# ---------------------------------------------------------------------------
# public surface
# ---------------------------------------------------------------------------

def mass_matrix(p: RobotParams, st: JointState) -> np.ndarray:
    return _mass(p.m1, p.m2, p.l1, p.l2, st.q[1])


def coriolis_matrix(p: RobotParams, st: JointState) -> np.ndarray:
    return _coriolis(p.m2, p.l1, p.l2, st.q[1], st.qd[0], st.qd[1])


def gravity_vector(p: RobotParams, st: JointState) -> np.ndarray:
    return _gravity(p.m1, p.m2, p.l1, p.l2, p.g, st.q[0], st.q[1])


def disturbance_vector(st: JointState) -> np.ndarray:
    """Bounded configuration-dependent disturbance [2 c1 s2 + 5 c1^2; -(...)]."""
    return _disturbance(st.q[0], st.q[1])


def jacobian(p: RobotParams, st: JointState) -> np.ndarray:
    return _jacobian(p.l1, p.l2, st.q[0], st.q[1])


def jacobian_time_derivative(p: RobotParams, st: JointState) -> np.ndarray:
    return _jacobian_dot(p.l1, p.l2, st.q[0], st.q[1], st.qd[0], st.qd[1])


def forward_kinematics(p: RobotParams, st: JointState) -> np.ndarray:
    """End-effector position [l1 c1 + l2 c12; l1 s1 + l2 s12]."""
    return _fk(p.l1, p.l2, st.q[0], st.q[1])


def inverse_kinematics(p: RobotParams, x: np.ndarray, elbow_sign: float = 1.0) -> np.ndarray:
    """Joint angles reaching Cartesian position x; elbow_sign picks the branch.

    Raises ValueError when x is outside the reachable annulus.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    r2 = float(x @ x)
    c2 = (r2 - p.l1**2 - p.l2**2) / (2.0 * p.l1 * p.l2)
    if not -1.0 <= c2 <= 1.0:
        raise ValueError(f"position {x} out of reach")
    q2 = float(np.sign(elbow_sign) or 1.0) * float(np.arccos(c2))
    q1 = float(np.arctan2(x[1], x[0])
               - np.arctan2(p.l2 * np.sin(q2), p.l1 + p.l2 * np.cos(q2)))
    return np.array([q1, q2])


def forward_dynamics(p: RobotParams, st: JointState, tau_c, tau_e) -> np.ndarray:
    """Joint acceleration M^-1(tau_c + tau_e - C qd - G - F)."""
    tau_c = np.asarray(tau_c, dtype=float).reshape(2)
    tau_e = np.asarray(tau_e, dtype=float).reshape(2)
    if not (np.all(np.isfinite(tau_c)) and np.all(np.isfinite(tau_e))):
        raise ValueError("torques must be finite")
    return _forward_dyn(p.m1, p.m2, p.l1, p.l2, p.g,
                        st.q[0], st.q[1], st.qd[0], st.qd[1],
                        tau_c, tau_e, True)


def cartesian_model(p: RobotParams, st: JointState,
                    singularity_tol: float = DEFAULT_SINGULARITY_TOL,
                    disturbance: bool = True) -> CartesianModel:
    """Cartesian-space model at the given joint state.

    Raises SingularityError when |det J| falls below `singularity_tol`.
    """
    det_j = p.l1 * p.l2 * np.sin(st.q[1])
    if abs(det_j) < singularity_tol:
        raise SingularityError(det_j, singularity_tol)
    mx, cx, gx, fx, j, det_j = _cartesian(
        p.m1, p.m2, p.l1, p.l2, p.g,
        st.q[0], st.q[1], st.qd[0], st.qd[1], disturbance)
    xi, _ = _inv2(mx)
    xdot = j @ st.qd
    gamma = xi @ (-(cx @ xdot) - gx)
    return CartesianModel(Mx=mx, Cx=cx, Gx=gx, Fx=fx, Xi=xi, Gamma=gamma,
                          J=j, det_j=det_j)


def lumped_uncertainty(p: RobotParams, st: JointState, fe_cartesian) -> np.ndarray:
    """Lumped uncertainty Mx^-1(-Fx + fe) seen by the Cartesian controllers."""
    model = cartesian_model(p, st)
    fe = np.asarray(fe_cartesian, dtype=float).reshape(2)
    return model.Xi @ (-model.Fx + fe)
