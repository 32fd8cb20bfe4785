import numpy as np
import pytest

from liftedocp.ocpdef import scenario_path
from liftedocp.robotmodel import (
    ContactStatus, ModelError, builtin_arm3, builtin_monoped, builtin_pendulum, builtin_quadruped,
    dump_model, load_model, load_model_file, monoped_standing_configuration,
    quadruped_standing_configuration,
)

PENDULUM = """
[link]
name = bob
mass = 1.0
com = 0 0 -1

[joint]
name = hinge
type = revolute
parent = world
child = bob
axis = 0 1 0
"""


def test_pendulum_text():
    m = load_model(PENDULUM)
    assert (m.n, m.n_a, m.n_f) == (1, 1, 0)
    assert not m.floating_base


def test_shipped_pendulum_file():
    m = load_model_file(scenario_path("pendulum.model"))
    assert (m.n, m.n_a) == (1, 1)
    assert m.link_masses == [1.0]


def test_shipped_monoped_file():
    m = load_model_file(scenario_path("monoped.model"))
    assert (m.n, m.n_a, m.n_f) == (5, 2, 3)
    assert m.n_passive == 3
    assert m == builtin_monoped()


def test_missing_parent_names_joint():
    text = PENDULUM.replace("parent = world", "parent = ghost")
    with pytest.raises(ModelError, match="hinge") as info:
        load_model(text)
    assert "ghost" in str(info.value)
    assert info.value.line is not None


@pytest.mark.parametrize("patch, fragment", [
    (("mass = 1.0", "mass = -1.0"), "mass"),
    (("type = revolute", "type = spherical"), "spherical"),
    (("axis = 0 1 0", "axis = 0 1"), "axis"),
    (("name = bob\n", "name = bob\ncolor = red\n"), "color"),
])
def test_malformed_files_rejected(patch, fragment):
    with pytest.raises(ModelError, match=fragment):
        load_model(PENDULUM.replace(*patch, 1))


def test_unattached_link_rejected():
    with pytest.raises(ModelError, match="not attached"):
        load_model(PENDULUM + "\n[link]\nname = orphan\nmass = 1\n")


def test_builtin_quadruped_dimensions():
    m = builtin_quadruped()
    assert m.n == 18 and m.n_a == 12 and m.n_f == 12
    S = m.selection_matrix()
    assert S.shape == (12, 18)
    np.testing.assert_array_equal(S[:, :6], 0.0)
    np.testing.assert_array_equal(S[:, 6:], np.eye(12))


@pytest.mark.parametrize("factory", [builtin_quadruped, builtin_monoped, builtin_pendulum, builtin_arm3])
def test_dump_load_roundtrip(factory):
    m = factory()
    m2 = load_model(dump_model(m))
    assert m2 == m
    assert m2.n == m.n and m2.n_a == m.n_a
    for I1, I2 in zip(m.inertias, m2.inertias):
        np.testing.assert_array_equal(I1, I2)


def test_contact_status_dimensions():
    m = builtin_monoped()
    st = ContactStatus.make(m, [True])
    assert m.contact_dim(st) == 2  # planar foot: x and z rows only
    assert m.contact_dim(ContactStatus.none(m)) == 0
    with pytest.raises(ValueError):
        ContactStatus.make(m, [True, False])


def test_standing_configurations_touch_ground():
    from liftedocp.dynamics import forward_pass, point_kinematics

    q = quadruped_standing_configuration(builtin_quadruped())
    m = builtin_quadruped()
    data = forward_pass(m, q)
    for b, o in zip(m.contact_bodies, m.contact_offsets):
        assert abs(point_kinematics(data, b, o).position[2]) < 1e-9

    m = builtin_monoped()
    q = monoped_standing_configuration(m)
    data = forward_pass(m, q)
    foot = point_kinematics(data, m.contact_bodies[0], m.contact_offsets[0]).position
    assert abs(foot[2]) < 1e-9
    # statically balanced: no passive torque once the foot carries the weight
    from liftedocp.ocpdef import gravity_compensation
    from liftedocp.dynamics import contact_kinematics, inverse_dynamics
    st = ContactStatus.make(m, [True])
    u, f = gravity_compensation(m, q, st)
    _, J, _, _ = contact_kinematics(m, q, np.zeros(m.n), st)
    h = inverse_dynamics(m, q, np.zeros(m.n), np.zeros(m.n))
    np.testing.assert_allclose((h - J.T @ f)[:3], 0.0, atol=1e-9)
