import numpy as np
import pytest

from _fd import assert_jac_close, fd_config, fd_vec, random_state
from liftedocp.dynamics import (
    BaumgarteParams, ContactKktMatrix, SingularContactError, baumgarte_residual, bias, center_of_mass,
    contact_dynamics, contact_kinematics, dynamics_derivatives, factorize_contact_kkt, forward_pass,
    impulse_derivatives, impulse_dynamics, inverse_dynamics, linearize_contact_stage, mass_matrix,
)
from liftedocp.robotmodel import (
    ContactFrame, ContactStatus, Joint, Link, RobotModel, builtin_arm3, builtin_monoped, builtin_pendulum,
    builtin_quadruped, builtin_slider, monoped_standing_configuration, quadruped_standing_configuration,
)

QUAD = builtin_quadruped()
SAMPLES = 50
PARAMS = BaumgarteParams(25.0, 25.0)


def quad_samples(seed=0, count=SAMPLES):
    rng = np.random.default_rng(seed)
    return [random_state(QUAD, rng) for _ in range(count)]


# -- inverse dynamics and mass matrix ------------------------------------------------

def test_pendulum_hanging_is_equilibrium():
    m = builtin_pendulum()
    np.testing.assert_allclose(inverse_dynamics(m, [0.0], [0.0], [0.0]), 0.0, atol=1e-14)
    np.testing.assert_allclose(bias(m, [0.0], [0.0]), 0.0, atol=1e-14)


def test_pendulum_horizontal_torque():
    # m g l for a 1 kg bob at 1 m held horizontal
    m = builtin_pendulum()
    tau = inverse_dynamics(m, [np.pi / 2], [0.0], [0.0])
    assert abs(abs(tau[0]) - 9.81) < 1e-12


def test_slider_mass_matrix():
    np.testing.assert_allclose(mass_matrix(builtin_slider(2.0), [0.3]), [[2.0]], atol=1e-15)


def test_zero_gravity_zero_velocity_bias():
    m = builtin_quadruped()
    m.gravity = np.zeros(3)
    q = m.space.random(np.random.default_rng(5))
    np.testing.assert_allclose(bias(m, q, np.zeros(m.n)), 0.0, atol=1e-12)


def test_inverse_dynamics_identity():
    """ID(q, v, a, f) = M a + h - J^T f from separately computed pieces."""
    for q, v, a, status, f in quad_samples(1, 20):
        M = mass_matrix(QUAD, q)
        h = bias(QUAD, q, v)
        _, J, _, _ = contact_kinematics(QUAD, q, v, status)
        tau = inverse_dynamics(QUAD, q, v, a, f, status)
        np.testing.assert_allclose(tau, M @ a + h - J.T @ f, atol=1e-8)


def test_mass_matrix_symmetric_and_matches_unit_accelerations():
    rng = np.random.default_rng(2)
    for _ in range(5):
        q = QUAD.space.random(rng)
        M = mass_matrix(QUAD, q)
        np.testing.assert_allclose(M, M.T, atol=1e-12)
        z = np.zeros(QUAD.n)
        h0 = inverse_dynamics(QUAD, q, z, z)
        for j in range(QUAD.n):
            e = np.zeros(QUAD.n)
            e[j] = 1.0
            np.testing.assert_allclose(M[:, j], inverse_dynamics(QUAD, q, z, e) - h0, atol=1e-10)
        assert np.min(np.linalg.eigvalsh(M)) > 0


# -- contact kinematics ---------------------------------------------------------------

def _monoped_stance():
    m = builtin_monoped()
    q = monoped_standing_configuration(m)
    data = forward_pass(m, q)
    foot = data.p[m.contact_bodies[0]] + data.R[m.contact_bodies[0]] @ m.contact_offsets[0]
    return m, q, ContactStatus.make(m, [True], [foot])


def test_monoped_foot_at_reference():
    m, q, status = _monoped_stance()
    p, J, pdot, jdv = contact_kinematics(m, q, np.zeros(m.n), status)
    np.testing.assert_allclose(p, 0.0, atol=1e-12)
    np.testing.assert_allclose(pdot, 0.0, atol=1e-15)
    np.testing.assert_allclose(jdv, 0.0, atol=1e-15)
    assert J.shape == (2, 5)


def test_contact_jacobian_and_jdot_match_finite_differences():
    for q, v, _, status, _ in quad_samples(3):
        p, J, pdot, jdv = contact_kinematics(QUAD, q, v, status)
        if not p.size:
            continue
        Jfd = fd_config(lambda qq: contact_kinematics(QUAD, qq, v, status)[0], QUAD.space, q)
        assert_jac_close(J, Jfd)
        np.testing.assert_allclose(pdot, J @ v, atol=1e-12)
        delta = 1e-6
        Jp = contact_kinematics(QUAD, QUAD.space.integrate(q, delta * v), v, status)[1]
        Jm = contact_kinematics(QUAD, QUAD.space.integrate(q, -delta * v), v, status)[1]
        np.testing.assert_allclose(jdv, (Jp - Jm) @ v / (2 * delta), atol=1e-4 * max(1, np.abs(jdv).max()))


def test_baumgarte_residual_reassembly():
    for q, v, a, status, _ in quad_samples(4, 10):
        p, J, pdot, jdv = contact_kinematics(QUAD, q, v, status)
        res = baumgarte_residual(QUAD, q, v, a, status, PARAMS)
        np.testing.assert_allclose(res, J @ a + jdv + 50.0 * pdot + 625.0 * p, atol=1e-10)
        res0 = baumgarte_residual(QUAD, q, v, a, status, BaumgarteParams(0.0, 0.0))
        np.testing.assert_allclose(res0, J @ a + jdv, atol=1e-10)


def test_baumgarte_residual_zero_for_stationary_foot():
    m, q, status = _monoped_stance()
    z = np.zeros(m.n)
    np.testing.assert_allclose(baumgarte_residual(m, q, z, z, status, PARAMS), 0.0, atol=1e-12)


# -- saddle-point solves ------------------------------------------------------------

def test_kkt_without_contacts_is_forward_dynamics():
    q = QUAD.space.random(np.random.default_rng(6))
    v = np.random.default_rng(7).normal(size=QUAD.n)
    u = np.random.default_rng(8).normal(size=QUAD.n_a)
    none = ContactStatus.none(QUAD)
    M = mass_matrix(QUAD, q)
    tau = -bias(QUAD, q, v)
    tau[6:] += u
    a, f = contact_dynamics(QUAD, q, v, u, none, PARAMS)
    assert f.size == 0
    np.testing.assert_allclose(a, np.linalg.solve(M, tau), atol=1e-9)
    K = factorize_contact_kkt(QUAD, q, none)
    np.testing.assert_allclose(K.solve(tau), np.linalg.solve(M, tau), atol=1e-9)


def test_kkt_one_dof_hand_solution():
    b = 0.7
    K = ContactKktMatrix(np.array([[2.0]]), np.array([[1.0]]))
    sol = K.solve(np.array([0.0, -b]))
    a, f = sol[0], -sol[1]  # second block holds -f
    assert abs(a + b) < 1e-15 and abs(f + 2 * b) < 1e-15


def test_kkt_residual_on_quadruped():
    q = quadruped_standing_configuration(QUAD)
    q = QUAD.space.integrate(q, 0.05 * np.random.default_rng(9).normal(size=QUAD.n))
    status = ContactStatus.make(QUAD, [True] * 4)
    K = factorize_contact_kkt(QUAD, q, status)
    rhs = np.random.default_rng(10).normal(size=QUAD.n + 12)
    np.testing.assert_allclose(K.matrix() @ K.solve(rhs), rhs, atol=1e-9)


def _standing_quadruped():
    q = quadruped_standing_configuration(QUAD)
    data = forward_pass(QUAD, q)
    refs = [data.p[b] + data.R[b] @ o for b, o in zip(QUAD.contact_bodies, QUAD.contact_offsets)]
    return q, ContactStatus.make(QUAD, [True] * 4, refs)


def test_standing_quadruped_force_balance():
    from liftedocp.ocpdef import gravity_compensation

    q, status = _standing_quadruped()
    u, _ = gravity_compensation(QUAD, q, status)
    a, f = contact_dynamics(QUAD, q, np.zeros(QUAD.n), u, status, PARAMS)
    np.testing.assert_allclose(a, 0.0, atol=1e-9)
    assert abs(f[2::3].sum() - QUAD.total_mass * 9.81) < 1e-6


def test_contact_dynamics_satisfies_defining_equations():
    rng = np.random.default_rng(11)
    for q, v, _, status, _ in quad_samples(12, 20):
        u = rng.normal(scale=5.0, size=QUAD.n_a)
        a, f = contact_dynamics(QUAD, q, v, u, status, PARAMS)
        tau = inverse_dynamics(QUAD, q, v, a, f, status)
        np.testing.assert_allclose(tau[:6], 0.0, atol=1e-9)
        np.testing.assert_allclose(tau[6:], u, atol=1e-9)
        np.testing.assert_allclose(baumgarte_residual(QUAD, q, v, a, status, PARAMS), 0.0, atol=1e-9)


def test_impulse_one_dof_hand_solution():
    m = builtin_slider(2.0)
    dv, lam = impulse_dynamics(m, [0.0], [-1.0], ContactStatus.make(m, [True]))
    assert abs(dv[0] - 1.0) < 1e-14 and abs(lam[0] - 2.0) < 1e-14


def test_impulse_consistent_velocity_is_unchanged():
    m = builtin_monoped()
    q = monoped_standing_configuration(m)
    v = np.zeros(m.n)
    v[3] = 0.5  # swing the hip with the foot moving: remove foot velocity first
    st = ContactStatus.make(m, [True])
    _, J, _, _ = contact_kinematics(m, q, v, st)
    v = v - np.linalg.pinv(J) @ (J @ v)
    dv, lam = impulse_dynamics(m, q, v, st)
    np.testing.assert_allclose(dv, 0.0, atol=1e-12)
    np.testing.assert_allclose(lam, 0.0, atol=1e-12)


def test_impulse_dynamics_equations_and_energy():
    for q, v, _, status, _ in quad_samples(13):
        dv, lam = impulse_dynamics(QUAD, q, v, status)
        M = mass_matrix(QUAD, q)
        _, J, _, _ = contact_kinematics(QUAD, q, v, status)
        np.testing.assert_allclose(M @ dv - J.T @ lam, 0.0, atol=1e-9)
        np.testing.assert_allclose(J @ (v + dv), 0.0, atol=1e-9)
        vp = v + dv
        assert 0.5 * vp @ M @ vp <= 0.5 * v @ M @ v + 1e-9


def test_coincident_contacts_are_reported():
    links = [Link("mass", 1.0)]
    joints = [Joint("slide", "prismatic", "world", "mass", axis=(0.0, 0.0, 1.0))]
    frames = [ContactFrame("left", "mass", axes="z"), ContactFrame("right", "mass", axes="z")]
    m = RobotModel(links, joints, frames)
    with pytest.raises(SingularContactError) as info:
        factorize_contact_kkt(m, [0.0], ContactStatus.make(m, [True, True]))
    assert "right" in info.value.frames


# -- derivative suite ---------------------------------------------------------------

def test_dynamics_derivatives_match_finite_differences():
    for q, v, a, status, f in quad_samples(14):
        d = dynamics_derivatives(QUAD, q, v, a, f, status, PARAMS)
        assert_jac_close(d.ID_q, fd_config(lambda x: inverse_dynamics(QUAD, x, v, a, f, status), QUAD.space, q))
        assert_jac_close(d.ID_v, fd_vec(lambda x: inverse_dynamics(QUAD, q, x, a, f, status), v))
        assert_jac_close(d.a_q, fd_config(lambda x: baumgarte_residual(QUAD, x, v, a, status, PARAMS),
                                          QUAD.space, q))
        assert_jac_close(d.a_v, fd_vec(lambda x: baumgarte_residual(QUAD, q, x, a, status, PARAMS), v))


def test_dynamics_derivatives_linear_blocks_exact():
    q, v, a, status, f = quad_samples(15, 1)[0]
    d = dynamics_derivatives(QUAD, q, v, a, f, status, PARAMS)
    _, J, _, _ = contact_kinematics(QUAD, q, v, status)
    np.testing.assert_array_equal(d.ID_a, mass_matrix(QUAD, q))
    np.testing.assert_allclose(d.ID_f, -J.T, atol=1e-15)
    np.testing.assert_allclose(d.a_a, J, atol=1e-15)


def _impulse_residual(q, v, dv, lam, status):
    M = mass_matrix(QUAD, q)
    _, J, _, _ = contact_kinematics(QUAD, q, v, status)
    return M @ dv - J.T @ lam, J @ (v + dv)


def test_impulse_derivatives_match_finite_differences():
    rng = np.random.default_rng(16)
    for q, v, _, status, lam in quad_samples(16):
        dv = rng.normal(size=QUAD.n)
        d = impulse_derivatives(QUAD, q, v, dv, lam, status)
        assert_jac_close(d.Gamma_q, fd_config(lambda x: _impulse_residual(x, v, dv, lam, status)[0], QUAD.space, q))
        assert_jac_close(d.v_q, fd_config(lambda x: _impulse_residual(x, v, dv, lam, status)[1], QUAD.space, q))
        np.testing.assert_array_equal(d.Gamma_dv, mass_matrix(QUAD, q))
        np.testing.assert_array_equal(d.v_v, d.v_dv)
        np.testing.assert_allclose(d.Gamma_v, 0.0)


def test_stage_linearization_on_arm_and_monoped():
    for model, q in ((builtin_arm3(), None), (builtin_monoped(), None)):
        rng = np.random.default_rng(17)
        q, v, a, status, f = random_state(model, rng, contact_prob=1.0)
        sd = linearize_contact_stage(model, q, v, a, f, status, PARAMS)
        assert_jac_close(sd.id_q, fd_config(lambda x: inverse_dynamics(model, x, v, a, f, status), model.space, q))
        assert_jac_close(sd.acc_q, fd_config(lambda x: baumgarte_residual(model, x, v, a, status, PARAMS),
                                             model.space, q))


def test_center_of_mass_jacobian():
    q = QUAD.space.random(np.random.default_rng(18))
    _, J = center_of_mass(QUAD, forward_pass(QUAD, q))
    assert_jac_close(J, fd_config(lambda x: center_of_mass(QUAD, forward_pass(QUAD, x))[0], QUAD.space, q))


def test_baumgarte_params_validated():
    with pytest.raises(ValueError):
        BaumgarteParams(-1.0, 2.0)
