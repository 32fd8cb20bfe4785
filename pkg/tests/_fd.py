"""Finite-difference oracles shared by the tests."""

import numpy as np

from liftedocp.robotmodel import ContactStatus


def fd_vec(fun, x, h=1e-6):
    """Central differences of ``fun`` w.r.t. a plain vector."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * h))
    return np.column_stack(cols) if cols else np.zeros((np.size(fun(x)), 0))


def fd_config(fun, space, q, h=1e-6):
    """Central differences of ``fun(q)`` along tangent directions (via ``integrate``)."""
    cols = []
    for j in range(space.nv):
        e = np.zeros(space.nv)
        e[j] = h
        cols.append((np.asarray(fun(space.integrate(q, e))) - np.asarray(fun(space.integrate(q, -e)))) / (2 * h))
    return np.column_stack(cols)


def assert_jac_close(analytic, numeric, rel=1e-4):
    """Agreement relative to the Jacobian's magnitude (floor 1)."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    assert analytic.shape == numeric.shape, (analytic.shape, numeric.shape)
    scale = max(1.0, float(np.max(np.abs(numeric))) if numeric.size else 1.0)
    err = float(np.max(np.abs(analytic - numeric))) if numeric.size else 0.0
    assert err <= rel * scale, f"max error {err:.3e} exceeds {rel:g} x {scale:.3e}"


def random_state(model, rng, contact_prob=0.6):
    """Random configuration, velocity, acceleration, status and matching forces."""
    q = model.space.random(rng)
    v = rng.normal(size=model.n)
    a = rng.normal(size=model.n)
    active = rng.uniform(size=len(model.contact_frames)) < contact_prob
    refs = rng.normal(scale=0.3, size=(len(model.contact_frames), 3))
    status = ContactStatus.make(model, active, refs)
    f = rng.normal(scale=10.0, size=model.contact_dim(status))
    return q, v, a, status, f
