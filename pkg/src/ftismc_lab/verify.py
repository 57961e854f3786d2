"""Randomized property suites exercised by the `verify` CLI subcommand.

Each suite returns a SuiteResult; the CLI prints them and fails if any suite
does.  The suites cover the math the benchmark rests on: the power-sum
inequalities behind the Lyapunov estimates, model self-consistency of the arm,
energy conservation of the passive plant, and respect of the fixed-time
settling bounds by the closed loop on the abstract double-integrator plant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import theoretical_bounds
from .config import default_config
from .controllers import GainSet
from .dynamics import (JointState, RobotParams, coriolis_matrix,
                       forward_dynamics, forward_kinematics, gravity_vector,
                       jacobian, mass_matrix)
from .fxmath import FixedTimeGains, fixed_time_bound, scalar_settling_time
from .simulation import run_scenario


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str


def lemma_inequalities(seed: int = 0, trials: int = 200) -> SuiteResult:
    """Power-sum inequalities for positive vectors.

    For x_i > 0: sum x_i^(k+1) >= (sum x_i^2)^((k+1)/2) with 0 < k < 1, and
    sum x_i^k >= n^(1-k) (sum x_i)^k with k > 1.
    """
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(trials):
        n = int(rng.integers(2, 6))
        x = rng.uniform(1e-3, 10.0, n)
        k_lo = rng.uniform(0.05, 0.95)
        k_hi = rng.uniform(1.05, 4.0)
        m1 = np.sum(x ** (k_lo + 1.0)) - np.sum(x * x) ** ((k_lo + 1.0) / 2.0)
        m2 = np.sum(x ** k_hi) - n ** (1.0 - k_hi) * np.sum(x) ** k_hi
        worst = min(worst, m1, m2)
    ok = worst >= -1e-12
    return SuiteResult("lemma-inequalities", ok, f"worst margin {worst:.3e}")


def jacobian_finite_difference(seed: int = 0, trials: int = 100,
                               tol: float = 1e-6) -> SuiteResult:
    """Jacobian vs central differences of forward kinematics."""
    rng = np.random.default_rng(seed)
    p = RobotParams()
    h = 1e-7
    worst = 0.0
    for _ in range(trials):
        q = rng.uniform(-np.pi, np.pi, 2)
        jac = jacobian(p, JointState(q=q, qd=np.zeros(2)))
        fd = np.empty((2, 2))
        for j in range(2):
            dq = np.zeros(2)
            dq[j] = h
            fd[:, j] = (forward_kinematics(p, JointState(q=q + dq, qd=np.zeros(2)))
                        - forward_kinematics(p, JointState(q=q - dq, qd=np.zeros(2)))) / (2 * h)
        worst = max(worst, float(np.max(np.abs(jac - fd))))
    return SuiteResult("jacobian-fd", worst < tol, f"max abs dev {worst:.3e}")


def dynamics_roundtrip(seed: int = 0, trials: int = 1000,
                       tol: float = 1e-9) -> SuiteResult:
    """M qdd + C qd + G + F reproduces the torque fed to forward dynamics."""
    from .dynamics import disturbance_vector
    rng = np.random.default_rng(seed)
    p = RobotParams()
    worst = 0.0
    for _ in range(trials):
        st = JointState(q=rng.uniform(-np.pi, np.pi, 2),
                        qd=rng.uniform(-5.0, 5.0, 2))
        tau = rng.uniform(-50.0, 50.0, 2)
        qdd = forward_dynamics(p, st, tau, np.zeros(2))
        back = (mass_matrix(p, st) @ qdd + coriolis_matrix(p, st) @ st.qd
                + gravity_vector(p, st) + disturbance_vector(st))
        worst = max(worst, float(np.max(np.abs(back - tau))))
    return SuiteResult("dynamics-roundtrip", worst < tol, f"max abs dev {worst:.3e}")


def power_conjugacy(seed: int = 0, trials: int = 200,
                    tol: float = 1e-12) -> SuiteResult:
    """Cartesian/joint power balance fc . (J qd) == (J^T fc) . qd."""
    rng = np.random.default_rng(seed)
    p = RobotParams()
    worst = 0.0
    for _ in range(trials):
        st = JointState(q=rng.uniform(-np.pi, np.pi, 2),
                        qd=rng.uniform(-3.0, 3.0, 2))
        fc = rng.uniform(-100.0, 100.0, 2)
        jac = jacobian(p, st)
        worst = max(worst, abs(float(fc @ (jac @ st.qd) - (jac.T @ fc) @ st.qd)))
    return SuiteResult("power-conjugacy", worst < tol, f"max abs dev {worst:.3e}")


def energy_conservation(tol: float = 1e-6) -> SuiteResult:
    """Passive, gravity-free, undisturbed arm conserves kinetic energy."""
    cfg = default_config(controller="none", disturbance=False, duration=10.0,
                         start_on_reference=False,
                         initial_q=(0.4, 1.1), initial_qd=(0.8, -0.5),
                         robot=RobotParams(g=0.0))
    cfg = _zero_force(cfg)
    res = run_scenario(cfg)
    if not res.ok:
        return SuiteResult("energy-conservation", False,
                           f"run aborted: {res.summary['status']}")
    p = cfg.robot
    q = np.column_stack([res.col("q1"), res.col("q2")])
    qd = np.column_stack([res.col("qd1"), res.col("qd2")])
    ke = np.empty(len(q))
    for i in range(len(q)):
        m = mass_matrix(p, JointState(q=q[i], qd=qd[i]))
        ke[i] = 0.5 * qd[i] @ (m @ qd[i])
    drift = float(np.max(np.abs(ke - ke[0])) / ke[0])
    return SuiteResult("energy-conservation", drift < tol,
                       f"relative drift {drift:.3e} over 10 s")


def _zero_force(cfg):
    from dataclasses import replace
    from .admittance import ForceProfile
    return replace(cfg, force=ForceProfile(amplitude=(0.0, 0.0)))


def lemma3_scalar(tol_threshold: float = 1e-6) -> SuiteResult:
    """Scalar fixed-time system settles before its bound from tiny and huge y0."""
    g = FixedTimeGains(lambda1=1.0, lambda2=1.0, alpha=0.5, beta=2.0)
    t_max = fixed_time_bound(g)
    worst = 0.0
    for y0 in (0.1, -0.1, 10.0, -10.0, 1000.0, -1000.0):
        t = scalar_settling_time(y0, g, threshold=tol_threshold)
        if t is None:
            return SuiteResult("lemma3-scalar", False, f"no settling from y0={y0}")
        worst = max(worst, t)
    return SuiteResult("lemma3-scalar", worst <= t_max,
                       f"max settling {worst:.3f} s vs bound {t_max:.3f} s")


def bound_respect(seed: int = 0, trials: int = 20,
                  threshold: float = 1e-4) -> SuiteResult:
    """Closed-loop fixed-time settling on the uncertainty-free plant.

    Random initial offsets spanning [0.01, 5] m on the double-integrator
    plant; every empirical settling time must respect the theorem-2 total,
    and the worst settling time must be insensitive to the 500x spread of
    initial offsets (less than 2x variation).
    """
    gains = GainSet()
    total = theoretical_bounds(gains).total_thm2
    rng = np.random.default_rng(seed)
    times = []
    for _ in range(trials):
        norm = rng.uniform(0.01, 5.0)
        ang = rng.uniform(0.0, 2.0 * np.pi)
        off = norm * np.array([np.cos(ang), np.sin(ang)])
        from .admittance import _desired
        x0 = _desired(0.0)[0] + off
        cfg = default_config(plant="point_mass", controller="ftismc_bsp",
                             disturbance=False, duration=2.0,
                             start_on_reference=False,
                             initial_q=(float(x0[0]), float(x0[1])),
                             initial_qd=(0.0, 0.0),
                             settle_threshold=threshold)
        cfg = _zero_force(cfg)
        res = run_scenario(cfg)
        if not res.ok:
            return SuiteResult("bound-respect", False,
                               f"run aborted: {res.summary['status']}")
        t = res.summary["settling_time"]
        if t is None or t > total:
            return SuiteResult("bound-respect", False,
                               f"settling {t} vs bound {total:.3f} (offset {norm:.3f} m)")
        times.append(t)
    spread = max(times) / max(min(times), 1e-12)
    ok = spread < 2.0
    return SuiteResult(
        "bound-respect", ok,
        f"settling in [{min(times):.3f}, {max(times):.3f}] s, bound {total:.3f} s, "
        f"spread {spread:.2f}x over 500x offsets")


ALL_SUITES = (lemma_inequalities, jacobian_finite_difference, dynamics_roundtrip,
              power_conjugacy, energy_conservation, lemma3_scalar, bound_respect)


def run_all(seed: int = 0) -> list[SuiteResult]:
    out = []
    for suite in ALL_SUITES:
        try:
            out.append(suite(seed) if "seed" in suite.__code__.co_varnames
                       else suite())
        except Exception as exc:  # a crash is a failure, not an abort
            out.append(SuiteResult(suite.__name__, False, f"exception: {exc!r}"))
    return out
