import numpy as np
import pytest

from ftismc_lab.admittance import Reference
from ftismc_lab.controllers import (BspGains, CompensatorGains, CtcGains,
                                    FtSurfaceGains, GainSet, NsSurfaceGains,
                                    PidGains, bsp_nominal, bsp_stabilizing,
                                    cartesian_to_joint_torque, compensator,
                                    control_output, ctc, ft_surface,
                                    ns_surface, ns_t1, pid, sigma1_integrand,
                                    sigma_rate)
from ftismc_lab.dynamics import (CartesianModel, JointState, RobotParams,
                                 cartesian_model, jacobian)
from ftismc_lab.fxmath import FixedTimeGains, fixed_time_bound, \
    scalar_settling_time, signed_power

P = RobotParams()


def identity_model():
    eye = np.eye(2)
    return CartesianModel(Mx=eye, Cx=np.zeros((2, 2)), Gx=np.zeros(2),
                          Fx=np.zeros(2), Xi=eye, Gamma=np.zeros(2),
                          J=eye, det_j=1.0)


def real_model(seed=0):
    rng = np.random.default_rng(seed)
    while True:
        q = rng.uniform(-np.pi, np.pi, 2)
        if abs(np.sin(q[1])) > 0.2:
            break
    st = JointState(q=q, qd=rng.uniform(-1, 1, 2))
    return st, cartesian_model(P, st)


def static_ref(xr=(0.0, 0.0)):
    return Reference(xr=np.asarray(xr, float), xrd=np.zeros(2),
                     xrdd=np.zeros(2))


def test_pid_zero_error():
    assert np.allclose(pid(np.zeros(2), np.zeros(2), np.zeros(2)), 0.0)


def test_pid_value_and_linearity():
    e = np.array([0.01, 0.0])
    out = pid(e, np.zeros(2), np.zeros(2))
    assert np.allclose(out, [-3.0, 0.0])
    assert np.allclose(pid(2 * e, np.zeros(2), np.zeros(2)), 2 * out)


def test_pid_integral_clamp():
    g = PidGains(kp=0.0, kd=0.0, ki=1.0, integral_limit=10.0)
    out = pid(np.zeros(2), np.zeros(2), np.array([100.0, -100.0]), g)
    assert np.allclose(out, [-10.0, 10.0])


def test_ctc_feedforward_at_zero_error():
    st, model = real_model(1)
    xdot = model.J @ st.qd
    ref = Reference(xr=np.zeros(2), xrd=xdot.copy(), xrdd=np.zeros(2))
    # zero error, zero reference acceleration: pure Cx xdot + Gx feedforward
    out = ctc(ref.xr, xdot, ref, model)
    assert np.allclose(out, model.Cx @ xdot + model.Gx)


def test_bsp_stabilizing_passthrough_and_value():
    ref = Reference(xr=np.zeros(2), xrd=np.array([0.3, -0.1]),
                    xrdd=np.zeros(2))
    assert np.allclose(bsp_stabilizing(np.zeros(2), ref), ref.xrd)
    out = bsp_stabilizing(np.array([1.0, 0.0]), static_ref())
    assert out[0] == pytest.approx(-73.0)
    assert out[1] == pytest.approx(0.0)


def test_bsp_stabilizing_odd():
    s1 = np.array([0.3, -0.7])
    out = bsp_stabilizing(s1, static_ref())
    assert np.allclose(bsp_stabilizing(-s1, static_ref()), -out)


def test_bsp_nominal_equilibrium_feedforward():
    st, model = real_model(2)
    x = model.J @ np.zeros(2)
    ref = Reference(xr=x, xrd=np.zeros(2), xrdd=np.zeros(2))
    # s1 = s2 = 0 and static reference: u0 = Mx (-Gamma)
    out = bsp_nominal(x, np.zeros(2), ref, model, BspGains(), np.zeros(2))
    assert np.allclose(out, model.Mx @ (-model.Gamma))


def test_ft_surface_values():
    g = FtSurfaceGains()
    assert np.allclose(ft_surface(np.zeros(2), np.zeros(2), g), 0.0)
    s = ft_surface(np.array([1.0, 0.0]), np.zeros(2), g)
    assert s[0] == pytest.approx(70.0)


def test_ft_surface_on_surface_settling():
    # sliding on s = 0 means edot = -k1 [e]^a - k2 [e]^b, which must settle
    # within the surface bound
    g = FtSurfaceGains()
    ft = FixedTimeGains(g.k1, g.k2, g.alpha, g.beta)
    t_max = fixed_time_bound(ft)
    assert t_max == pytest.approx(0.205)
    t = scalar_settling_time(1.0, ft)
    assert t is not None and t <= t_max


def test_ns_surface_values():
    g = NsSurfaceGains(k5=1.0, k6=1.0, m=0.5, n=2.0)
    assert np.allclose(ns_surface(np.zeros(2), np.zeros(2), g), 0.0)
    s = ns_surface(np.zeros(2), np.array([1.0, 0.0]), g)
    assert s[0] == pytest.approx(1.0)


def test_ns_surface_reduces_to_ft_dynamics():
    # solving s = 0 for edot gives edot = -k5 [e]^m - k6 [e]^n, the same
    # reduced dynamics as the singular surface with matched gains
    g = NsSurfaceGains()
    rng = np.random.default_rng(4)
    for e1 in rng.uniform(-2.0, 2.0, 20):
        e = np.array([e1, 0.0])
        edot = -(g.k5 * signed_power(e, g.m) + g.k6 * signed_power(e, g.n))
        s = ns_surface(e, edot, g)
        assert abs(s[0]) < 1e-9


def test_ns_t1_positive_and_nonsingular_at_zero_error():
    g = NsSurfaceGains()
    t1 = ns_t1(np.zeros(2), np.array([1.0, -2.0]), g)
    assert np.all(np.isfinite(t1)) and np.all(t1 > 0)
    # exponent 1/m - 1 > 0, so T1 vanishes (rather than diverging) at w = 0
    assert np.allclose(ns_t1(np.zeros(2), np.zeros(2), g), 0.0)


def test_compensator_zero_at_zero_sigma():
    _, model = real_model(5)
    assert np.allclose(compensator(np.zeros(2), model), 0.0)


def test_compensator_hand_value():
    g = CompensatorGains(rho=1.0, epsilon=0.5, k3=1.0, k4=1.0,
                         p_exp=0.5, q_exp=2.0)
    out = compensator(np.array([1.0, 0.0]), identity_model(), g)
    assert out[0] == pytest.approx(-3.5)
    assert out[1] == pytest.approx(0.0)


def test_sigma_rate_sigma1():
    _, model = real_model(6)
    us = np.array([3.0, -1.0])
    psi = np.array([0.5, 0.2])
    assert np.allclose(sigma_rate("sigma1", us, model, psi),
                       model.Xi @ us + psi)


def test_sigma_rate_sigma2_includes_t1():
    _, model = real_model(7)
    us = np.array([3.0, -1.0])
    psi = np.array([0.5, 0.2])
    e = np.array([0.01, -0.02])
    edot = np.array([0.1, 0.3])
    expected = ns_t1(e, edot) * (model.Xi @ us + psi)
    assert np.allclose(sigma_rate("sigma2", us, model, psi, e=e, e_dot=edot),
                       expected)
    with pytest.raises(ValueError):
        sigma_rate("sigma2", us, model, psi)
    with pytest.raises(ValueError):
        sigma_rate("sigma3", us, model, psi)


def test_sigma1_dual_route_identity():
    # d(sigma1)/dt computed as sdot minus the explicit integrand must equal
    # the closed form Xi us + psi
    rng = np.random.default_rng(8)
    g = FtSurfaceGains()
    for seed in range(5):
        _, model = real_model(20 + seed)
        e = rng.uniform(0.01, 0.5, 2) * rng.choice([-1, 1], 2)
        edot = rng.uniform(-1.0, 1.0, 2)
        u0 = rng.uniform(-20, 20, 2)
        us = rng.uniform(-20, 20, 2)
        psi = rng.uniform(-5, 5, 2)
        xrdd = rng.uniform(-1, 1, 2)
        edd = model.Xi @ (u0 + us) + model.Gamma + psi - xrdd
        sdot = (edd + g.k1 * g.alpha * np.abs(e) ** (g.alpha - 1) * edot
                + g.k2 * g.beta * np.abs(e) ** (g.beta - 1) * edot)
        sigma_dot = sdot - sigma1_integrand(u0, model, xrdd, e, edot, g)
        assert np.allclose(sigma_dot, model.Xi @ us + psi, atol=1e-10)


def test_torque_map():
    assert np.allclose(cartesian_to_joint_torque(np.zeros(2), np.eye(2)), 0.0)
    fc = np.array([2.0, -1.0])
    assert np.allclose(cartesian_to_joint_torque(fc, np.eye(2)), fc)
    rng = np.random.default_rng(9)
    for _ in range(50):
        st = JointState(q=rng.uniform(-np.pi, np.pi, 2),
                        qd=rng.uniform(-3, 3, 2))
        fc = rng.uniform(-100, 100, 2)
        jac = jacobian(P, st)
        tau = cartesian_to_joint_torque(fc, jac)
        assert fc @ (jac @ st.qd) == pytest.approx(tau @ st.qd)


def test_control_output_decomposition():
    # the reported force must equal u0 + us exactly for every variant
    st, model = real_model(10)
    rng = np.random.default_rng(11)
    e = rng.uniform(-0.1, 0.1, 2)
    edot = rng.uniform(-0.5, 0.5, 2)
    xdot = model.J @ st.qd
    ref = Reference(xr=np.zeros(2), xrd=rng.uniform(-0.1, 0.1, 2),
                    xrdd=rng.uniform(-0.1, 0.1, 2))
    sigma = rng.uniform(-0.01, 0.01, 2)
    for name in ("pid", "ctc", "bsp", "ismc_pid", "ismc_ctc", "ismc_bsp",
                 "ftismc_bsp"):
        out = control_output(name, e, edot, xdot, ref, model, sigma,
                             np.zeros(2), np.zeros(2), np.zeros(2))
        assert np.array_equal(out.force, out.u0 + out.us)


def test_control_output_unknown_name():
    st, model = real_model(12)
    with pytest.raises(KeyError):
        control_output("nope", np.zeros(2), np.zeros(2), np.zeros(2),
                       static_ref(), model, np.zeros(2), np.zeros(2),
                       np.zeros(2), np.zeros(2))


def test_gain_validation():
    with pytest.raises(ValueError):
        CtcGains(kp=-1.0)
    with pytest.raises(ValueError):
        BspGains(alpha=1.2)
    with pytest.raises(ValueError):
        NsSurfaceGains(k5=0.0)
    with pytest.raises(ValueError):
        CompensatorGains(epsilon=0.0)
    with pytest.raises(ValueError):
        GainSet(ftismc_surface="other")
