"""Fixed-step closed-loop simulation.

The full ODE state is a 12-vector
    [q(2), qd(2), xi(2), xi_dot(2), sigma(2), e_int(2)]
holding the plant, the admittance offset, the active integral-surface value
and the PID error integral.  Integration is classical RK4 with the
controller re-evaluated inside every stage (a ZOH mode holds the force over
the step instead).  The backstepping virtual-control derivative is a
step-matched backward difference, frozen across the stages of one step.

On the point-mass plant the same controllers act on the double-integrator
xddot = u (identity Cartesian mass, no gravity/disturbance); that is the
abstract system the fixed-time bounds are stated for, and the one the
randomized bound-respect suites run on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .admittance import AdmittanceState, _admittance_accel, _desired, _human_force
from .config import SimConfig, config_dict
from .controllers import BSP, FTISMC_BSP, FTISMC_BSP_FT, ISMC_BSP, _alpha_stabilizing, _control
from .dynamics import (JointState, SingularityError, _cartesian, _fk,
                       _forward_dyn, _inv2, _jacobian, inverse_kinematics)

STATE_DIM = 12

LOG_COLUMNS = (
    "t", "q1", "q2", "qd1", "qd2", "x1", "x2", "xdot1", "xdot2",
    "xd1", "xd2", "xr1", "xr2", "e1", "e2", "fc1", "fc2", "tauc1", "tauc2",
    "fe1", "fe2", "s1", "s2", "sigma1", "sigma2", "u01", "u02", "us1", "us2",
    "detJ", "psi_inf",
)

_DIAG = 24  # x2 xdot2 xd2 xr2 e2 fc2 tauc2 fe2 s2 u02 us2 detJ psi_inf

STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_NONFINITE = 2

_PLANT_CODES = {"manipulator": 0, "point_mass": 1}


@dataclass
class SimState:
    """Full simulation state at one instant."""

    joint: JointState
    adm: AdmittanceState
    sigma: np.ndarray
    e_int: np.ndarray
    t: float = 0.0

    def pack(self) -> np.ndarray:
        return np.concatenate([self.joint.q, self.joint.qd,
                               self.adm.xi, self.adm.xid,
                               np.asarray(self.sigma, dtype=float).reshape(2),
                               np.asarray(self.e_int, dtype=float).reshape(2)])

    @classmethod
    def unpack(cls, y: np.ndarray, t: float) -> "SimState":
        y = np.asarray(y, dtype=float).reshape(STATE_DIM)
        return cls(joint=JointState(q=y[0:2], qd=y[2:4]),
                   adm=AdmittanceState(xi=y[4:6], xid=y[6:8]),
                   sigma=y[8:10].copy(), e_int=y[10:12].copy(), t=t)


@njit(cache=True)
def _eval(t, y, plant_code, ctrl_code, rp, adm, fpar, gains, dist_on, sing_tol,
          alpha_s_dot, held, held_fc, held_u0, held_us,
          dy, diag, want_diag):
    """One derivative evaluation; fills dy (and diag when asked).

    Returns STATUS_OK / STATUS_SINGULAR.
    """
    q1, q2, qd1, qd2 = y[0], y[1], y[2], y[3]
    xi = y[4:6]
    xid = y[6:8]
    sigma = y[8:10]
    eint = y[10:12]

    if plant_code == 0 and ctrl_code >= 2:
        det_sing = rp[2] * rp[3] * np.sin(q2)
        if abs(det_sing) < sing_tol:
            return STATUS_SINGULAR
        mx, cx, gx, fx, jac, detj = _cartesian(
            rp[0], rp[1], rp[2], rp[3], rp[4], q1, q2, qd1, qd2, dist_on)
        x = _fk(rp[2], rp[3], q1, q2)
        xdot = jac @ y[2:4]
        xim, _ = _inv2(mx)
    elif plant_code == 0:
        # passive and plain-PID runs never invert the Cartesian model, so
        # singular configurations are harmless and the run passes through them
        jac = _jacobian(rp[2], rp[3], q1, q2)
        detj = rp[2] * rp[3] * np.sin(q2)
        x = _fk(rp[2], rp[3], q1, q2)
        xdot = jac @ y[2:4]
        mx = np.eye(2)
        cx = np.zeros((2, 2))
        gx = np.zeros(2)
        fx = np.zeros(2)
        xim = np.eye(2)
    else:
        x = y[0:2].copy()
        xdot = y[2:4].copy()
        mx = np.eye(2)
        cx = np.zeros((2, 2))
        gx = np.zeros(2)
        fx = np.zeros(2)
        jac = np.eye(2)
        detj = 1.0
        xim = np.eye(2)

    fe = _human_force(t, fpar[0], fpar[1], fpar[2], fpar[3], fpar[4], fpar[5])
    if plant_code == 0 and ctrl_code >= 2:
        psi = xim @ (fe - fx)
    else:
        psi = np.zeros(2)

    xd, vd, ad = _desired(t)
    xidd = _admittance_accel(xi, xid, fe, adm[0], adm[1], adm[2])
    xr = xd + xi
    xrd = vd + xid
    xrdd = ad + xidd
    e = x - xr
    edot = xdot - xrd
    gamma = xim @ (-(cx @ xdot) - gx)

    if held:
        fc = held_fc
        u0 = held_u0
        us = held_us
        s = np.zeros(2)
        braket = xim @ us
        sigma_dot = braket + psi
        if ctrl_code == FTISMC_BSP:
            k5r = gains[10] ** (1.0 / gains[12])
            for i in range(2):
                w = edot[i] + gains[11] * np.sign(e[i]) * abs(e[i]) ** gains[13]
                sigma_dot[i] = (abs(w) ** (1.0 / gains[12] - 1.0)
                                / (gains[12] * k5r)) * sigma_dot[i]
        if ctrl_code < 4:
            sigma_dot = np.zeros(2)
    else:
        fc, u0, us, s, sigma_dot = _control(
            ctrl_code, e, edot, xdot, xrd, xrdd, mx, cx, gx, gamma,
            sigma, eint, alpha_s_dot, psi, gains)

    if plant_code == 0:
        tauc = jac.T @ fc
        taue = jac.T @ fe
        qdd = _forward_dyn(rp[0], rp[1], rp[2], rp[3], rp[4],
                           q1, q2, qd1, qd2, tauc, taue, dist_on)
    else:
        tauc = fc
        qdd = fc

    dy[0] = y[2]
    dy[1] = y[3]
    dy[2] = qdd[0]
    dy[3] = qdd[1]
    dy[4] = xid[0]
    dy[5] = xid[1]
    dy[6] = xidd[0]
    dy[7] = xidd[1]
    dy[8] = sigma_dot[0]
    dy[9] = sigma_dot[1]
    dy[10] = e[0]
    dy[11] = e[1]

    if want_diag:
        diag[0:2] = x
        diag[2:4] = xdot
        diag[4:6] = xd
        diag[6:8] = xr
        diag[8:10] = e
        diag[10:12] = fc
        diag[12:14] = tauc
        diag[14:16] = fe
        diag[16:18] = s
        diag[18:20] = u0
        diag[20:22] = us
        diag[22] = detj
        psi_inf = abs(psi[0])
        if abs(psi[1]) > psi_inf:
            psi_inf = abs(psi[1])
        diag[23] = psi_inf
    return STATUS_OK


@njit(cache=True)
def _alpha_at(t, y, plant_code, rp, gains):
    """Backstepping virtual control at the start-of-step state."""
    if plant_code == 0:
        x = _fk(rp[2], rp[3], y[0], y[1])
        jac_xdot = _jacobian(rp[2], rp[3], y[0], y[1]) @ y[2:4]
    else:
        x = y[0:2].copy()
        jac_xdot = y[2:4].copy()
    xd, vd, _ = _desired(t)
    e = x - (xd + y[4:6])
    xrd = vd + y[6:8]
    return _alpha_stabilizing(e, xrd, gains)


@njit(cache=True)
def _run(y0, t0, dt, n_steps, decim, plant_code, ctrl_code, rp, adm, fpar,
         gains, dist_on, sing_tol, zoh, transient_window, plateau_lo, plateau_hi,
         log):
    """Integrate the closed loop, filling `log` (one row per decimated step).

    Returns (status, rows_filled, steps_done, sum_e2[2], n_samples,
    max_psi, max_abs_e_post[2], chatter_sum, chatter_count).
    """
    y = y0.copy()
    dy1 = np.empty(STATE_DIM)
    dy2 = np.empty(STATE_DIM)
    dy3 = np.empty(STATE_DIM)
    dy4 = np.empty(STATE_DIM)
    diag = np.zeros(_DIAG)
    no_diag = np.zeros(_DIAG)
    zeros2 = np.zeros(2)
    alpha_s_dot = np.zeros(2)
    alpha_prev = np.zeros(2)
    have_alpha = False
    bsp_based = (ctrl_code == BSP or ctrl_code == ISMC_BSP
                 or ctrl_code == FTISMC_BSP or ctrl_code == FTISMC_BSP_FT)

    sum_e2 = np.zeros(2)
    max_e_post = np.zeros(2)
    n_samples = 0
    max_psi = 0.0
    chatter_sum = 0.0
    chatter_count = 0
    prev_tauc = np.zeros(2)
    have_tauc = False

    rows = 0
    status = STATUS_OK
    steps = 0
    for i in range(n_steps + 1):
        t = t0 + i * dt

        if bsp_based:
            a_now = _alpha_at(t, y, plant_code, rp, gains)
            if have_alpha:
                alpha_s_dot = (a_now - alpha_prev) / dt
            alpha_prev = a_now
            have_alpha = True

        # stage 1 doubles as the metrics/log evaluation at the accepted state
        status = _eval(t, y, plant_code, ctrl_code, rp, adm, fpar, gains,
                       dist_on, sing_tol, alpha_s_dot,
                       False, zeros2, zeros2, zeros2, dy1, diag, True)
        if status != STATUS_OK:
            break

        e1, e2 = diag[8], diag[9]
        sum_e2[0] += e1 * e1
        sum_e2[1] += e2 * e2
        n_samples += 1
        if diag[23] > max_psi:
            max_psi = diag[23]
        if t >= transient_window:
            if abs(e1) > max_e_post[0]:
                max_e_post[0] = abs(e1)
            if abs(e2) > max_e_post[1]:
                max_e_post[1] = abs(e2)
        if plateau_lo <= t < plateau_hi:
            if have_tauc:
                chatter_sum += (abs(diag[12] - prev_tauc[0])
                                + abs(diag[13] - prev_tauc[1]))
                chatter_count += 1
            prev_tauc[0] = diag[12]
            prev_tauc[1] = diag[13]
            have_tauc = True
        else:
            have_tauc = False

        if i % decim == 0 or i == n_steps:
            log[rows, 0] = t
            log[rows, 1:5] = y[0:4]
            log[rows, 5:13] = diag[0:8]
            log[rows, 13:15] = diag[8:10]
            log[rows, 15:17] = diag[10:12]
            log[rows, 17:19] = diag[12:14]
            log[rows, 19:21] = diag[14:16]
            log[rows, 21:23] = diag[16:18]
            log[rows, 23:25] = y[8:10]
            log[rows, 25:27] = diag[18:20]
            log[rows, 27:29] = diag[20:22]
            log[rows, 29] = diag[22]
            log[rows, 30] = diag[23]
            rows += 1

        if i == n_steps:
            break

        held_fc = diag[10:12].copy()
        held_u0 = diag[18:20].copy()
        held_us = diag[20:22].copy()

        status = _eval(t + 0.5 * dt, y + 0.5 * dt * dy1, plant_code, ctrl_code,
                       rp, adm, fpar, gains, dist_on, sing_tol, alpha_s_dot,
                       zoh, held_fc, held_u0, held_us, dy2, no_diag, False)
        if status != STATUS_OK:
            break
        status = _eval(t + 0.5 * dt, y + 0.5 * dt * dy2, plant_code, ctrl_code,
                       rp, adm, fpar, gains, dist_on, sing_tol, alpha_s_dot,
                       zoh, held_fc, held_u0, held_us, dy3, no_diag, False)
        if status != STATUS_OK:
            break
        status = _eval(t + dt, y + dt * dy3, plant_code, ctrl_code,
                       rp, adm, fpar, gains, dist_on, sing_tol, alpha_s_dot,
                       zoh, held_fc, held_u0, held_us, dy4, no_diag, False)
        if status != STATUS_OK:
            break

        y = y + (dt / 6.0) * (dy1 + 2.0 * dy2 + 2.0 * dy3 + dy4)
        steps = i + 1
        ok = True
        for k in range(STATE_DIM):
            if not np.isfinite(y[k]):
                ok = False
        if not ok:
            status = STATUS_NONFINITE
            break

    return (status, rows, steps, sum_e2, n_samples, max_psi, max_e_post,
            chatter_sum, chatter_count)


@dataclass
class SimResult:
    """Trajectory log plus run summary."""

    log: np.ndarray
    summary: dict
    status: int
    config: SimConfig

    def col(self, name: str) -> np.ndarray:
        return self.log[:, LOG_COLUMNS.index(name)]

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def _packed(cfg: SimConfig):
    rp = np.array([cfg.robot.m1, cfg.robot.m2, cfg.robot.l1, cfg.robot.l2,
                   cfg.robot.g])
    adm = np.array([cfg.admittance.km, cfg.admittance.kb, cfg.admittance.kk])
    fpar = np.array([cfg.force.amplitude[0], cfg.force.amplitude[1],
                     cfg.force.t_on, cfg.force.t_full,
                     cfg.force.t_rampdown, cfg.force.t_off])
    return rp, adm, fpar, cfg.gains.pack()


def initial_state(cfg: SimConfig) -> SimState:
    """Initial SimState, optionally placed exactly on the shaped reference."""
    if cfg.start_on_reference:
        xd, vd, _ = _desired(0.0)
        if cfg.plant == "manipulator":
            # elbow-down branch: gravity then sags the arm away from the
            # folded singularity instead of through it
            q0 = inverse_kinematics(cfg.robot, xd, elbow_sign=-1.0)
            jac = _jacobian(cfg.robot.l1, cfg.robot.l2, q0[0], q0[1])
            jinv, _ = _inv2(jac)
            qd0 = jinv @ vd
        else:
            q0, qd0 = xd, vd
    else:
        q0 = np.asarray(cfg.initial_q, dtype=float)
        qd0 = np.asarray(cfg.initial_qd, dtype=float)
    return SimState(joint=JointState(q=q0, qd=qd0),
                    adm=AdmittanceState(xi=np.zeros(2), xid=np.zeros(2)),
                    sigma=np.zeros(2), e_int=np.zeros(2), t=0.0)


def derivative(state: SimState, cfg: SimConfig, alpha_s_dot=None) -> np.ndarray:
    """Time derivative of the packed 12-component state.

    alpha_s_dot defaults to zero, matching the first-step convention of the
    step-matched backward difference used inside runs.
    """
    rp, adm, fpar, gains = _packed(cfg)
    y = state.pack()
    dy = np.empty(STATE_DIM)
    diag = np.zeros(_DIAG)
    asd = np.zeros(2) if alpha_s_dot is None else np.asarray(alpha_s_dot, float)
    status = _eval(state.t, y, _PLANT_CODES[cfg.plant],
                   cfg.gains.controller_code(cfg.controller),
                   rp, adm, fpar, gains, cfg.disturbance, cfg.singularity_tol,
                   asd, False, np.zeros(2), np.zeros(2), np.zeros(2),
                   dy, diag, False)
    if status == STATUS_SINGULAR:
        raise SingularityError(cfg.robot.l1 * cfg.robot.l2 * np.sin(state.joint.q[1]),
                               cfg.singularity_tol)
    if not np.all(np.isfinite(dy)):
        bad = LOG_COLUMNS[1 + int(np.argmax(~np.isfinite(dy)))]
        raise FloatingPointError(f"non-finite derivative (component {bad})")
    return dy


def rk4_step(state: SimState, cfg: SimConfig) -> SimState:
    """One classical RK4 step of length cfg.dt (zero virtual-control rate)."""
    y = state.pack()
    t, h = state.t, cfg.dt
    k1 = derivative(state, cfg)
    k2 = derivative(SimState.unpack(y + 0.5 * h * k1, t + 0.5 * h), cfg)
    k3 = derivative(SimState.unpack(y + 0.5 * h * k2, t + 0.5 * h), cfg)
    k4 = derivative(SimState.unpack(y + h * k3, t + h), cfg)
    return SimState.unpack(y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), t + h)


def run_scenario(cfg: SimConfig) -> SimResult:
    """Run one closed-loop scenario and summarize it.

    The summary carries per-axis RMSE over every accepted step (not just the
    decimated log), the post-transient error peak, the empirical settling
    time, the lumped-uncertainty witness against rho, and a chattering index
    (mean |delta tau| per step over the force plateau).
    """
    from .analysis import empirical_settling_time

    rp, adm, fpar, gains = _packed(cfg)
    n_steps = int(round(cfg.duration / cfg.dt))
    n_rows = n_steps // cfg.decimation + 2
    log = np.zeros((n_rows, len(LOG_COLUMNS)))
    y0 = initial_state(cfg).pack()

    (status, rows, steps, sum_e2, n_samples, max_psi, max_e_post,
     chat_sum, chat_cnt) = _run(
        y0, 0.0, cfg.dt, n_steps, cfg.decimation,
        _PLANT_CODES[cfg.plant], cfg.gains.controller_code(cfg.controller),
        rp, adm, fpar, gains, cfg.disturbance, cfg.singularity_tol, cfg.zoh,
        cfg.transient_window, cfg.force.t_full, cfg.force.t_rampdown, log)

    log = log[:rows]
    rmse = np.sqrt(sum_e2 / max(n_samples, 1))
    if rows:
        err = log[:, [LOG_COLUMNS.index("e1"), LOG_COLUMNS.index("e2")]]
        settle = empirical_settling_time(log[:, 0], err, cfg.settle_threshold)
    else:
        settle = None

    summary = {
        "status": {STATUS_OK: "ok", STATUS_SINGULAR: "singular",
                   STATUS_NONFINITE: "non-finite"}[status],
        "controller": cfg.controller,
        "steps_completed": int(steps),
        "rmse": [float(rmse[0]), float(rmse[1])],
        "max_abs_e_post_transient": [float(max_e_post[0]), float(max_e_post[1])],
        "settling_time": settle,
        "settle_threshold": cfg.settle_threshold,
        "max_psi_witness": float(max_psi),
        "rho": cfg.gains.comp.rho,
        "rho_satisfied": bool(max_psi <= cfg.gains.comp.rho),
        "chattering_index": float(chat_sum / chat_cnt) if chat_cnt else 0.0,
        "config": config_dict(cfg),
    }
    return SimResult(log=log, summary=summary, status=status, config=cfg)
