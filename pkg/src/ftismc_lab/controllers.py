"""The six benchmark control laws and their building blocks.

All controllers act in Cartesian space and output a Cartesian force that the
simulation maps to joint torques via tau = J^T f.  The ISMC variants split the
force into a nominal part u0 (PID, computed-torque, or fixed-time
backstepping) and a compensating part us built on an integral surface sigma
with sigma(0) = 0, so there is no reaching phase.

Controller names: pid | ctc | ismc_pid | ismc_ctc | ismc_bsp | ftismc_bsp
(plus the bare backstepping law "bsp" and "none" for passive runs; the
ftismc variant can optionally run on the singular fixed-time surface instead
of the nonsingular one, see GainSet.ftismc_surface).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .admittance import Reference
from .dynamics import CartesianModel
from .fxmath import _sgn, _spow, _spow_s

# controller codes used by the jitted dispatch
NONE = 0
PID = 1
CTC = 2
BSP = 3
ISMC_PID = 4
ISMC_CTC = 5
ISMC_BSP = 6
FTISMC_BSP = 7
FTISMC_BSP_FT = 8

CONTROLLER_CODES = {
    "none": NONE,
    "pid": PID,
    "ctc": CTC,
    "bsp": BSP,
    "ismc_pid": ISMC_PID,
    "ismc_ctc": ISMC_CTC,
    "ismc_bsp": ISMC_BSP,
    "ftismc_bsp": FTISMC_BSP,
}
BENCHMARK_CONTROLLERS = ("pid", "ctc", "ismc_pid", "ismc_ctc", "ismc_bsp", "ftismc_bsp")

# packed-gains layout (float64 vector consumed by the jitted kernels)
G_KP, G_KD, G_KI, G_ILIM, G_C = 0, 1, 2, 3, 4
G_L1, G_L2, G_L3, G_ALPHA, G_BETA = 5, 6, 7, 8, 9
G_K5, G_K6, G_M, G_N = 10, 11, 12, 13
G_RHO, G_EPS, G_K3, G_K4, G_P, G_Q, G_BLW, G_EFLOOR = 14, 15, 16, 17, 18, 19, 20, 21
G_K1, G_K2 = 22, 23
N_GAINS = 24


# ---------------------------------------------------------------------------
# gain containers
# ---------------------------------------------------------------------------

def _check_exponents(lo_name, lo, hi_name, hi):
    if not 0.0 < lo < 1.0:
        raise ValueError(f"{lo_name} must lie in (0, 1), got {lo}")
    if not hi > 1.0:
        raise ValueError(f"{hi_name} must be > 1, got {hi}")


@dataclass(frozen=True)
class PidGains:
    kp: float = 300.0
    kd: float = 400.0
    ki: float = 10.0
    integral_limit: float = 10.0

    def __post_init__(self):
        if min(self.kp, self.kd, self.ki) < 0 or self.integral_limit <= 0:
            raise ValueError("PID gains must be non-negative, integral limit positive")


@dataclass(frozen=True)
class CtcGains:
    kp: float = 300.0
    kd: float = 400.0

    def __post_init__(self):
        if self.kp <= 0 or self.kd <= 0:
            raise ValueError("CTC gains must be positive")


@dataclass(frozen=True)
class BspGains:
    """Fixed-time backstepping gains; alpha/beta are the signed-power exponents."""

    lambda1: float = 3.0
    lambda2: float = 20.0
    lambda3: float = 50.0
    alpha: float = 5.0 / 7.0
    beta: float = 5.0 / 3.0

    def __post_init__(self):
        if min(self.lambda1, self.lambda2, self.lambda3) <= 0:
            raise ValueError("backstepping gains must be positive")
        _check_exponents("alpha", self.alpha, "beta", self.beta)


@dataclass(frozen=True)
class FtSurfaceGains:
    """Fixed-time surface s = edot + k1*[e]^alpha + k2*[e]^beta."""

    k1: float = 20.0
    k2: float = 50.0
    alpha: float = 5.0 / 7.0
    beta: float = 5.0 / 3.0

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("surface gains must be positive")
        _check_exponents("alpha", self.alpha, "beta", self.beta)


@dataclass(frozen=True)
class NsSurfaceGains:
    """Nonsingular surface s = e + (1/k5^(1/m)) [edot + k6*[e]^n]^(1/m).

    On s = 0 this reduces to edot = -k5*[e]^m - k6*[e]^n, i.e. the same
    fixed-time error dynamics as the FtSurfaceGains surface with
    (k1, k2, alpha, beta) = (k5, k6, m, n).
    """

    k5: float = 20.0
    k6: float = 50.0
    m: float = 5.0 / 7.0
    n: float = 5.0 / 3.0

    def __post_init__(self):
        if self.k5 <= 0 or self.k6 <= 0:
            raise ValueError("surface gains must be positive")
        _check_exponents("m", self.m, "n", self.n)


@dataclass(frozen=True)
class CompensatorGains:
    """Reaching law us = Mx(-(rho+eps)*sign(sigma) - k3*[sigma]^p - k4*[sigma]^q).

    boundary_layer > 0 replaces sign with a saturation of that width;
    0 keeps the pure (chattering) sign function.  Exponents are named
    p_exp/q_exp to avoid colliding with the joint-position symbol q.
    """

    rho: float = 30.0
    epsilon: float = 0.1
    k3: float = 20.0
    k4: float = 50.0
    p_exp: float = 5.0 / 7.0
    q_exp: float = 5.0 / 3.0
    boundary_layer: float = 0.0

    def __post_init__(self):
        if self.rho < 0 or self.epsilon <= 0:
            raise ValueError("rho must be >= 0 and epsilon > 0")
        if self.k3 <= 0 or self.k4 <= 0:
            raise ValueError("k3 and k4 must be positive")
        _check_exponents("p_exp", self.p_exp, "q_exp", self.q_exp)
        if self.boundary_layer < 0:
            raise ValueError("boundary_layer must be >= 0 (0 disables)")


@dataclass(frozen=True)
class GainSet:
    """Every gain the benchmark needs, with the defaults used throughout."""

    pid: PidGains = field(default_factory=PidGains)
    ctc: CtcGains = field(default_factory=CtcGains)
    bsp: BspGains = field(default_factory=BspGains)
    ft: FtSurfaceGains = field(default_factory=FtSurfaceGains)
    ns: NsSurfaceGains = field(default_factory=NsSurfaceGains)
    comp: CompensatorGains = field(default_factory=CompensatorGains)
    linear_c: float = 10.0
    e_floor: float = 1e-8
    ftismc_surface: str = "ns"

    def __post_init__(self):
        if self.linear_c <= 0:
            raise ValueError("linear surface gain c must be positive")
        if self.ftismc_surface not in ("ns", "ft"):
            raise ValueError("ftismc_surface must be 'ns' or 'ft'")

    def pack(self) -> np.ndarray:
        g = np.zeros(N_GAINS)
        g[G_KP], g[G_KD], g[G_KI] = self.pid.kp, self.pid.kd, self.pid.ki
        g[G_ILIM] = self.pid.integral_limit
        g[G_C] = self.linear_c
        g[G_L1], g[G_L2], g[G_L3] = self.bsp.lambda1, self.bsp.lambda2, self.bsp.lambda3
        g[G_ALPHA], g[G_BETA] = self.bsp.alpha, self.bsp.beta
        g[G_K5], g[G_K6], g[G_M], g[G_N] = self.ns.k5, self.ns.k6, self.ns.m, self.ns.n
        g[G_RHO], g[G_EPS] = self.comp.rho, self.comp.epsilon
        g[G_K3], g[G_K4] = self.comp.k3, self.comp.k4
        g[G_P], g[G_Q] = self.comp.p_exp, self.comp.q_exp
        g[G_BLW] = self.comp.boundary_layer
        g[G_EFLOOR] = self.e_floor
        g[G_K1], g[G_K2] = self.ft.k1, self.ft.k2
        return g

    def controller_code(self, name: str) -> int:
        code = CONTROLLER_CODES[name]
        if code == FTISMC_BSP and self.ftismc_surface == "ft":
            return FTISMC_BSP_FT
        return code


@dataclass
class ControlOutput:
    """Cartesian control force with per-axis diagnostics."""

    force: np.ndarray
    u0: np.ndarray
    us: np.ndarray
    s: np.ndarray
    sigma: np.ndarray
    sigma_dot: np.ndarray


# ---------------------------------------------------------------------------
# jitted control law (shared by the public wrappers and the simulation loop)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _alpha_stabilizing(s1, xrd, g):
    return (-(g[G_L1] * s1 + g[G_L2] * _spow(s1, g[G_ALPHA])
              + g[G_L3] * _spow(s1, g[G_BETA])) + xrd)


@njit(cache=True)
def _ns_surface_raw(e, edot, k5, k6, m, n):
    """Nonsingular surface value and the positive chain-rule factor T1."""
    k5_root = k5 ** (1.0 / m)
    s = np.empty(2)
    t1 = np.empty(2)
    for i in range(2):
        w = edot[i] + k6 * _spow_s(e[i], n)
        s[i] = e[i] + _spow_s(w, 1.0 / m) / k5_root
        t1[i] = abs(w) ** (1.0 / m - 1.0) / (m * k5_root)
    return s, t1


@njit(cache=True)
def _control(code, e, edot, xdot, xrd, xrdd, mx, cx, gx, gamma,
             sigma, eint, alpha_s_dot, psi, g):
    """Evaluate one control law.

    Returns (fc, u0, us, s, sigma_dot).  sigma_dot is the closed-form rate of
    the active integral surface (zero for the non-ISMC controllers), with the
    actual lumped uncertainty psi already substituted.
    """
    u0 = np.zeros(2)
    us = np.zeros(2)
    s = np.zeros(2)
    sigma_dot = np.zeros(2)

    # nominal controller
    if code == PID or code == ISMC_PID:
        for i in range(2):
            ei = min(max(eint[i], -g[G_ILIM]), g[G_ILIM])
            u0[i] = -(g[G_KP] * e[i] + g[G_KD] * edot[i] + g[G_KI] * ei)
    elif code == CTC or code == ISMC_CTC:
        u0 = mx @ (xrdd - g[G_KD] * edot - g[G_KP] * e) + cx @ xdot + gx
    elif code == BSP or code == ISMC_BSP or code == FTISMC_BSP or code == FTISMC_BSP_FT:
        alpha_s = _alpha_stabilizing(e, xrd, g)
        s2 = xdot - alpha_s
        u0 = mx @ (-gamma + alpha_s_dot
                   - g[G_L1] * s2 - g[G_L2] * _spow(s2, g[G_ALPHA])
                   - g[G_L3] * _spow(s2, g[G_BETA]))

    # compensator on the integral surface
    if code == ISMC_PID or code == ISMC_CTC or code == ISMC_BSP:
        s = edot + g[G_C] * e
        braket = np.empty(2)
        for i in range(2):
            braket[i] = -(g[G_RHO] + g[G_EPS]) * _sgn(sigma[i], g[G_BLW])
        us = mx @ braket
        sigma_dot = braket + psi
    elif code == FTISMC_BSP:
        s, t1 = _ns_surface_raw(e, edot, g[G_K5], g[G_K6], g[G_M], g[G_N])
        braket = np.empty(2)
        for i in range(2):
            braket[i] = (-(g[G_RHO] + g[G_EPS]) * _sgn(sigma[i], g[G_BLW])
                         - g[G_K3] * _spow_s(sigma[i], g[G_P])
                         - g[G_K4] * _spow_s(sigma[i], g[G_Q]))
        us = mx @ braket
        sigma_dot = t1 * (braket + psi)
    elif code == FTISMC_BSP_FT:
        s = edot + g[G_K1] * _spow(e, g[G_ALPHA]) + g[G_K2] * _spow(e, g[G_BETA])
        braket = np.empty(2)
        for i in range(2):
            braket[i] = (-(g[G_RHO] + g[G_EPS]) * _sgn(sigma[i], g[G_BLW])
                         - g[G_K3] * _spow_s(sigma[i], g[G_P])
                         - g[G_K4] * _spow_s(sigma[i], g[G_Q]))
        us = mx @ braket
        sigma_dot = braket + psi

    return u0 + us, u0, us, s, sigma_dot


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def pid(e, e_dot, e_int, gains: PidGains = PidGains()) -> np.ndarray:
    """Baseline PID force -(kp e + kd edot + ki int(e)), integral clamped."""
    e = np.asarray(e, dtype=float).reshape(2)
    e_dot = np.asarray(e_dot, dtype=float).reshape(2)
    e_int = np.clip(np.asarray(e_int, dtype=float).reshape(2),
                    -gains.integral_limit, gains.integral_limit)
    return -(gains.kp * e + gains.kd * e_dot + gains.ki * e_int)


def ctc(x, x_dot, ref: Reference, model: CartesianModel,
        gains: CtcGains = CtcGains()) -> np.ndarray:
    """Computed-torque force Mx(xrdd - kd edot - kp e) + Cx xdot + Gx."""
    x = np.asarray(x, dtype=float).reshape(2)
    x_dot = np.asarray(x_dot, dtype=float).reshape(2)
    e = x - ref.xr
    e_dot = x_dot - ref.xrd
    return (model.Mx @ (ref.xrdd - gains.kd * e_dot - gains.kp * e)
            + model.Cx @ x_dot + model.Gx)


def bsp_stabilizing(s1, ref: Reference, g: BspGains = BspGains()) -> np.ndarray:
    """Virtual control -(l1 s1 + l2 [s1]^alpha + l3 [s1]^beta) + xrd."""
    s1 = np.asarray(s1, dtype=float).reshape(2)
    gains = GainSet(bsp=g).pack()
    return _alpha_stabilizing(s1, np.asarray(ref.xrd, dtype=float), gains)


def bsp_nominal(x, x_dot, ref: Reference, model: CartesianModel,
                g: BspGains, alpha_s_dot) -> np.ndarray:
    """Fixed-time backstepping nominal force.

    u0 = Mx(-Gamma + d(alpha_s)/dt - l1 s2 - l2 [s2]^alpha - l3 [s2]^beta)
    with s2 = xdot - alpha_s.
    """
    x = np.asarray(x, dtype=float).reshape(2)
    x_dot = np.asarray(x_dot, dtype=float).reshape(2)
    alpha_s = bsp_stabilizing(x - ref.xr, ref, g)
    s2 = x_dot - alpha_s
    from .fxmath import signed_power
    return model.Mx @ (-model.Gamma + np.asarray(alpha_s_dot, dtype=float).reshape(2)
                       - g.lambda1 * s2
                       - g.lambda2 * signed_power(s2, g.alpha)
                       - g.lambda3 * signed_power(s2, g.beta))


def ft_surface(e, e_dot, g: FtSurfaceGains = FtSurfaceGains()) -> np.ndarray:
    """Fixed-time surface s = edot + k1 [e]^alpha + k2 [e]^beta."""
    from .fxmath import signed_power
    e = np.asarray(e, dtype=float).reshape(2)
    e_dot = np.asarray(e_dot, dtype=float).reshape(2)
    return e_dot + g.k1 * signed_power(e, g.alpha) + g.k2 * signed_power(e, g.beta)


def ns_surface(e, e_dot, g: NsSurfaceGains = NsSurfaceGains()) -> np.ndarray:
    """Nonsingular fixed-time surface (see NsSurfaceGains)."""
    e = np.asarray(e, dtype=float).reshape(2)
    e_dot = np.asarray(e_dot, dtype=float).reshape(2)
    s, _ = _ns_surface_raw(e, e_dot, g.k5, g.k6, g.m, g.n)
    return s


def ns_t1(e, e_dot, g: NsSurfaceGains = NsSurfaceGains()) -> np.ndarray:
    """Positive factor T1 = |edot + k6 [e]^n|^(1/m - 1) / (m k5^(1/m)).

    Multiplies the sigma2 rate; its exponent 1/m - 1 > 0 is what makes the
    surface derivative nonsingular at e = 0.
    """
    e = np.asarray(e, dtype=float).reshape(2)
    e_dot = np.asarray(e_dot, dtype=float).reshape(2)
    _, t1 = _ns_surface_raw(e, e_dot, g.k5, g.k6, g.m, g.n)
    return t1


def compensator(sigma, model: CartesianModel,
                g: CompensatorGains = CompensatorGains()) -> np.ndarray:
    """Reaching-law force us (see CompensatorGains); us = 0 at sigma = 0."""
    from .fxmath import signed_power
    sigma = np.asarray(sigma, dtype=float).reshape(2)
    sgn = np.array([_sgn(sigma[0], g.boundary_layer), _sgn(sigma[1], g.boundary_layer)])
    braket = (-(g.rho + g.epsilon) * sgn
              - g.k3 * signed_power(sigma, g.p_exp)
              - g.k4 * signed_power(sigma, g.q_exp))
    return model.Mx @ braket


def sigma_rate(kind: str, us, model: CartesianModel, psi,
               e=None, e_dot=None, ns: NsSurfaceGains = NsSurfaceGains()) -> np.ndarray:
    """Closed-form rate of the integral surface.

    kind="sigma1": sigma_dot = Xi us + psi (also the rate of the linear-ISMC
    surface).  kind="sigma2": sigma_dot = T1(e, edot) * (Xi us + psi), which
    needs the tracking error pair.  Both start from sigma(0) = 0 by
    construction, which is what eliminates the reaching phase.
    """
    us = np.asarray(us, dtype=float).reshape(2)
    psi = np.asarray(psi, dtype=float).reshape(2)
    base = model.Xi @ us + psi
    if kind == "sigma1":
        return base
    if kind == "sigma2":
        if e is None or e_dot is None:
            raise ValueError("sigma2 rate needs the tracking error and its derivative")
        return ns_t1(e, e_dot, ns) * base
    raise ValueError(f"unknown integral surface kind {kind!r}")


def sigma1_integrand(u0, model: CartesianModel, xrdd, e, e_dot,
                     g: FtSurfaceGains = FtSurfaceGains(),
                     e_floor: float = 1e-8) -> np.ndarray:
    """Explicit nominal-part integrand of the sigma1 surface.

    Xi u0 + Gamma - xrdd + k1 a [e]^(a-1) edot + k2 b [e]^(b-1) edot.
    The [e]^(alpha-1) term is singular at e = 0; |e| is floored at `e_floor`
    in that term only (this is exactly the singularity the nonsingular
    surface exists to avoid).
    """
    e = np.asarray(e, dtype=float).reshape(2)
    e_dot = np.asarray(e_dot, dtype=float).reshape(2)
    xrdd = np.asarray(xrdd, dtype=float).reshape(2)
    u0 = np.asarray(u0, dtype=float).reshape(2)
    e_reg = np.where(np.abs(e) < e_floor, e_floor, np.abs(e))
    sing = g.k1 * g.alpha * e_reg ** (g.alpha - 1.0) * e_dot
    reg = g.k2 * g.beta * np.abs(e) ** (g.beta - 1.0) * e_dot
    return model.Xi @ u0 + model.Gamma - xrdd + sing + reg


def cartesian_to_joint_torque(force, jac) -> np.ndarray:
    """Map a Cartesian force to joint torques: tau = J^T f (power conjugate)."""
    force = np.asarray(force, dtype=float).reshape(2)
    return np.asarray(jac, dtype=float).T @ force


def control_output(name: str, e, e_dot, x_dot, ref: Reference,
                   model: CartesianModel, sigma, e_int, alpha_s_dot, psi,
                   gains: GainSet = GainSet()) -> ControlOutput:
    """Evaluate a named controller; the functional heart of every variant."""
    code = gains.controller_code(name)
    fc, u0, us, s, sig_dot = _control(
        code,
        np.asarray(e, dtype=float).reshape(2),
        np.asarray(e_dot, dtype=float).reshape(2),
        np.asarray(x_dot, dtype=float).reshape(2),
        np.asarray(ref.xrd, dtype=float).reshape(2),
        np.asarray(ref.xrdd, dtype=float).reshape(2),
        model.Mx, model.Cx, model.Gx, model.Gamma,
        np.asarray(sigma, dtype=float).reshape(2),
        np.asarray(e_int, dtype=float).reshape(2),
        np.asarray(alpha_s_dot, dtype=float).reshape(2),
        np.asarray(psi, dtype=float).reshape(2),
        gains.pack())
    return ControlOutput(force=fc, u0=u0, us=us, s=s,
                         sigma=np.asarray(sigma, dtype=float).reshape(2),
                         sigma_dot=sig_dot)
