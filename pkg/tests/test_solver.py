import numpy as np
import pytest

from _fd import fd_config, fd_vec
from liftedocp.dynamics import contact_dynamics
from liftedocp.ocpdef import ContactSchedule, OcpDefinition, StageCost, TerminalCost, build_gait
from liftedocp.robotmodel import ContactStatus, builtin_monoped, builtin_slider
from liftedocp.solver import (
    SolverOptions, initialize_iterates, kkt_norm, linearize_node, solve, update_iterates,
)


def _x0(defn):
    return defn.reference_q[0], defn.reference_v[0]


def slider_definition(N=15):
    m = builtin_slider(2.0)
    none = ContactStatus.none(m)
    costs = [StageCost(q_ref=np.array([1.0]), w_q=np.array([10.0]), w_v=np.ones(1), w_u=np.array([0.1]))
             for _ in range(N)]
    term = TerminalCost(q_ref=np.array([1.0]), w_q=np.array([100.0]), v_ref=np.zeros(1), w_v=np.array([10.0]))
    return OcpDefinition(m, N, 0.05, ContactSchedule([none] * N), costs, term, torque_limit=30.0)


def test_pendulum_swingup_converges():
    d = build_gait("swingup")
    r = solve(d, _x0(d), SolverOptions(eps=1e-3, max_iters=100))
    assert r.converged, r.message
    assert r.trace.kkt_norm[-1] < 1e-8
    qs, vs = r.iterates.states()
    assert abs(qs[-1, 0] - np.pi) < 0.05
    # forward rollout of the discretized dynamics from x0 with the optimal torques
    q, v = _x0(d)
    for st in r.iterates.stages:
        a, _ = contact_dynamics(d.model, q, v, st.u, d.status(0), d.baumgarte)
        q, v = d.model.space.integrate(q, d.dt * v), v + d.dt * a
    np.testing.assert_allclose(q, qs[-1], atol=1e-8)
    np.testing.assert_allclose(v, vs[-1], atol=1e-8)
    u = np.array([st.u for st in r.iterates.stages])
    assert np.all(np.abs(u) <= d.torque_limit + 1e-9)


def test_monoped_stand_is_nearly_solved_by_initial_guess():
    d = build_gait("stand")
    for mode in ("lifted", "nonlifted"):
        r = solve(d, _x0(d), SolverOptions(mode=mode, eps=1e-3, max_iters=20))
        assert r.converged, (mode, r.message)
        assert r.iterations <= 6


@pytest.mark.parametrize("make", [lambda: build_gait("swingup", N=20), slider_definition], ids=["pendulum", "slider"])
def test_contact_free_modes_produce_identical_iterates(make):
    d = make()
    x0 = _x0(d) if d.reference_q is not None else (np.zeros(d.model.n), np.zeros(d.model.n))
    guess = initialize_iterates(d, x0, policy="hold", eps=1e-2)
    opts = dict(eps=1e-2, max_iters=8, kkt_tolerance=1e-300)
    a = solve(d, x0, SolverOptions(mode="lifted", **opts), initial_guess=guess, keep_history=True)
    b = solve(d, x0, SolverOptions(mode="nonlifted", **opts), initial_guess=guess, keep_history=True)
    assert len(a.history) == len(b.history) == 9
    for ia, ib in zip(a.history, b.history):
        for sa, sb in zip(ia.stages, ib.stages):
            for name in ("q", "v", "u", "lmd", "gmm"):
                np.testing.assert_allclose(getattr(sa, name), getattr(sb, name), atol=1e-8)
            np.testing.assert_allclose(sa.ipm.s, sb.ipm.s, atol=1e-8)
            np.testing.assert_allclose(sa.ipm.z, sb.ipm.z, atol=1e-8)


def test_solve_is_deterministic():
    d = build_gait("hop")
    opts = SolverOptions(eps=1e-2, max_iters=5, kkt_tolerance=1e-300)
    r1, r2 = solve(d, _x0(d), opts), solve(d, _x0(d), opts)
    np.testing.assert_array_equal(r1.trace.kkt_norm, r2.trace.kkt_norm)
    for s1, s2 in zip(r1.iterates.stages, r2.iterates.stages):
        np.testing.assert_array_equal(s1.q, s2.q)


def test_threaded_linearization_matches_serial():
    d = build_gait("hop")
    r1 = solve(d, _x0(d), SolverOptions(eps=1e-2, max_iters=3, kkt_tolerance=1e-300))
    r2 = solve(d, _x0(d), SolverOptions(eps=1e-2, max_iters=3, kkt_tolerance=1e-300, threads=2))
    np.testing.assert_allclose(r1.trace.kkt_norm, r2.trace.kkt_norm, rtol=1e-12)


def test_initial_iterate_is_strictly_interior_and_consistent():
    d = build_gait("hop")
    its = initialize_iterates(d, _x0(d), eps=0.1)
    for i, st in enumerate(its.stages):
        if st.ipm.size:
            assert np.all(st.ipm.s > 0) and np.all(st.ipm.z > 0)
            np.testing.assert_allclose(st.ipm.s * st.ipm.z, 0.1)
        if st.kind == "contact":
            a, f = contact_dynamics(d.model, st.q, st.v, st.u, d.status(i), d.baumgarte)
            np.testing.assert_allclose(st.a, a, atol=1e-9)
            np.testing.assert_allclose(st.f, f, atol=1e-9)


def test_positivity_after_every_accepted_step():
    d = build_gait("hop")
    r = solve(d, _x0(d), SolverOptions(eps=1e-3, max_iters=120), keep_history=True)
    assert r.converged, r.message
    for its in r.history + [r.iterates]:
        for st in its.stages:
            assert np.all(st.ipm.s > 0) and np.all(st.ipm.z > 0)
    assert np.all(r.trace.kkt_norm[-1] < 1e-8)


def test_zero_step_length_leaves_iterates():
    d = build_gait("hop")
    x0 = _x0(d)
    its = initialize_iterates(d, x0)
    before = its.copy()
    steps = [linearize_node(d, its, i, x0, True) for i in range(d.N)]
    from liftedocp.liftedkkt import expand
    z = np.zeros(2 * d.model.n)
    exp = [expand(s, z, np.zeros(s.lin.nu), z, z) for s in steps]
    update_iterates(d, its, exp, 0.0, 0.0, (z, z))
    for a, b in zip(its.stages, before.stages):
        for name in ("q", "v", "a", "f", "u", "lmd", "gmm", "beta", "mu", "nu"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_kkt_norm_has_no_side_effects():
    d = build_gait("hop")
    its = initialize_iterates(d, _x0(d))
    before = its.copy()
    kkt_norm(d, its, _x0(d), lifted=False)
    for a, b in zip(its.stages, before.stages):
        np.testing.assert_array_equal(a.a, b.a)


def test_max_iters_status_and_trace_length():
    d = build_gait("hop")
    r = solve(d, _x0(d), SolverOptions(eps=1e-3, max_iters=2))
    assert r.status == "max_iters" and not r.converged
    assert len(r.trace) == 3 and r.iterations == 2


def test_nonlifted_solution_satisfies_forward_dynamics():
    d = build_gait("hop")
    r = solve(d, _x0(d), SolverOptions(mode="nonlifted", eps=1e-3, max_iters=120))
    assert r.converged, r.message
    for i, st in enumerate(r.iterates.stages):
        if st.kind == "contact":
            a, f = contact_dynamics(d.model, st.q, st.v, st.u, d.status(i), d.baumgarte)
            np.testing.assert_allclose(st.a, a, atol=1e-9)


def test_lifted_kkt_point_is_dynamically_consistent():
    d = build_gait("hop")
    r = solve(d, _x0(d), SolverOptions(mode="lifted", eps=1e-3, max_iters=120))
    assert r.converged, r.message
    for i, st in enumerate(r.iterates.stages):
        if st.kind == "contact":
            a, f = contact_dynamics(d.model, st.q, st.v, st.u, d.status(i), d.baumgarte)
            np.testing.assert_allclose(st.a, a, atol=1e-6)
            np.testing.assert_allclose(st.f, f, atol=1e-6)


def test_invalid_options():
    with pytest.raises(ValueError):
        SolverOptions(mode="fast")
    with pytest.raises(ValueError):
        SolverOptions(eps=0.0)
    with pytest.raises(ValueError):
        initialize_iterates(build_gait("hop"), (np.zeros(5), np.zeros(5)), policy="bogus")
