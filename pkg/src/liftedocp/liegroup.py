"""Configuration-manifold arithmetic for fixed- and floating-base systems.

A floating-base configuration vector is laid out as::

    q = [base_position (3), base_orientation (4, quaternion x y z w), joints (n_j)]

and its tangent vectors as::

    d = [linear (3, base frame), angular (3, base frame), joints (n_j)]

The base is treated as R^3 x SO(3) with both increments expressed in the
body frame, so ``integrate`` is ``p + R d_lin`` and ``R Exp(d_ang)``.
A fixed-base configuration is a plain vector of joint coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = 1e-8


def skew(w: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
    )


def quat_to_matrix(quat: np.ndarray) -> np.ndarray:
    x, y, z, w = quat
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    x1, y1, z1, w1 = q1
    x2, y2, z2, w2 = q2
    return np.array(
        [
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        ]
    )


def quat_conjugate(quat: np.ndarray) -> np.ndarray:
    return np.array([-quat[0], -quat[1], -quat[2], quat[3]])


def quat_exp(w: np.ndarray) -> np.ndarray:
    """Unit quaternion of the rotation vector ``w``."""
    theta = float(np.sqrt(w @ w))
    if theta < _EPS:
        # second-order Taylor expansion of sin(theta/2)/theta and cos(theta/2)
        s = 0.5 - theta * theta / 48.0
        c = 1.0 - theta * theta / 8.0
    else:
        s = np.sin(0.5 * theta) / theta
        c = np.cos(0.5 * theta)
    return np.array([s * w[0], s * w[1], s * w[2], c])


def quat_log(quat: np.ndarray) -> np.ndarray:
    """Rotation vector of a unit quaternion, on the shortest path."""
    if quat[3] < 0.0:
        quat = -quat
    vec = quat[:3]
    sin_half = float(np.sqrt(vec @ vec))
    if sin_half < _EPS:
        # 2 atan2(s, w) / s for s -> 0
        return 2.0 / quat[3] * (1.0 - sin_half * sin_half / (3.0 * quat[3] ** 2)) * vec
    theta = 2.0 * np.arctan2(sin_half, quat[3])
    return theta / sin_half * vec


def so3_exp(w: np.ndarray) -> np.ndarray:
    theta = float(np.sqrt(w @ w))
    W = skew(w)
    if theta < _EPS:
        return np.eye(3) + W + 0.5 * W @ W
    return (
        np.eye(3)
        + np.sin(theta) / theta * W
        + (1.0 - np.cos(theta)) / (theta * theta) * W @ W
    )


def so3_right_jacobian_inv(phi: np.ndarray) -> np.ndarray:
    """Inverse of the right Jacobian of SO(3) at rotation vector ``phi``."""
    theta = float(np.sqrt(phi @ phi))
    P = skew(phi)
    if theta < 1e-5:
        return np.eye(3) + 0.5 * P + (1.0 / 12.0) * P @ P
    coef = 1.0 / (theta * theta) - (1.0 + np.cos(theta)) / (2.0 * theta * np.sin(theta))
    return np.eye(3) + 0.5 * P + coef * P @ P


@dataclass
class Configuration:
    """Structured view of a floating-base configuration vector."""

    base_position: np.ndarray
    base_orientation: np.ndarray
    joint_angles: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.base_position, self.base_orientation, self.joint_angles]
        )

    @classmethod
    def from_vector(cls, q: np.ndarray) -> "Configuration":
        q = np.asarray(q, dtype=float)
        return cls(q[:3].copy(), q[3:7].copy(), q[7:].copy())


class ConfigurationSpace:
    """The composite manifold of a (possibly floating-base) kinematic tree.

    Parameters
    ----------
    n_joints:
        Number of scalar joint coordinates excluding the floating base.
    floating_base:
        Whether the first six velocity coordinates belong to a free base.
    """

    def __init__(self, n_joints: int, floating_base: bool = False):
        self.n_joints = int(n_joints)
        self.floating_base = bool(floating_base)
        self.nq = self.n_joints + (7 if floating_base else 0)
        self.nv = self.n_joints + (6 if floating_base else 0)

    def __repr__(self) -> str:
        return f"ConfigurationSpace(n_joints={self.n_joints}, floating_base={self.floating_base})"

    def neutral(self) -> np.ndarray:
        q = np.zeros(self.nq)
        if self.floating_base:
            q[6] = 1.0
        return q

    def random(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        q = scale * rng.uniform(-1.0, 1.0, self.nq)
        if self.floating_base:
            quat = rng.normal(size=4)
            q[3:7] = quat / np.linalg.norm(quat)
        return q

    def _check(self, q: np.ndarray, name: str = "q") -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.nq,):
            raise ValueError(f"{name} has shape {q.shape}, expected ({self.nq},)")
        return q

    def _check_tangent(self, d: np.ndarray) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        if d.shape != (self.nv,):
            raise ValueError(f"tangent vector has shape {d.shape}, expected ({self.nv},)")
        return d

    def normalize(self, q: np.ndarray) -> np.ndarray:
        q = np.array(q, dtype=float)
        if self.floating_base:
            q[3:7] /= np.linalg.norm(q[3:7])
        return q

    def integrate(self, q: np.ndarray, d: np.ndarray) -> np.ndarray:
        """Return ``q (+) d``; the base quaternion is renormalized."""
        q = self._check(q)
        d = self._check_tangent(d)
        if not self.floating_base:
            return q + d
        out = np.empty(self.nq)
        R = quat_to_matrix(q[3:7])
        out[:3] = q[:3] + R @ d[:3]
        quat = quat_multiply(q[3:7], quat_exp(d[3:6]))
        out[3:7] = quat / np.sqrt(quat @ quat)
        out[7:] = q[7:] + d[6:]
        return out

    def difference(self, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
        """Return ``q1 (-) q2``, the tangent d at q2 with ``q2 (+) d = q1``."""
        q1 = self._check(q1, "q1")
        q2 = self._check(q2, "q2")
        if not self.floating_base:
            return q1 - q2
        out = np.empty(self.nv)
        R2 = quat_to_matrix(q2[3:7])
        out[:3] = R2.T @ (q1[:3] - q2[:3])
        out[3:6] = quat_log(quat_multiply(quat_conjugate(q2[3:7]), q1[3:7]))
        out[6:] = q1[7:] - q2[7:]
        return out

    def difference_jacobians(
        self, q1: np.ndarray, q2: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """Tangent-space Jacobians of ``difference(q1, q2)`` w.r.t. q1 and q2."""
        q1 = self._check(q1, "q1")
        q2 = self._check(q2, "q2")
        n = self.nv
        J1 = np.eye(n)
        J2 = -np.eye(n)
        if not self.floating_base:
            return J1, J2
        R1 = quat_to_matrix(q1[3:7])
        R2 = quat_to_matrix(q2[3:7])
        d_lin = R2.T @ (q1[:3] - q2[:3])
        phi = quat_log(quat_multiply(quat_conjugate(q2[3:7]), q1[3:7]))
        J1[:3, :3] = R2.T @ R1
        J1[3:6, 3:6] = so3_right_jacobian_inv(phi)
        J2[:3, 3:6] = skew(d_lin)
        J2[3:6, 3:6] = -so3_right_jacobian_inv(-phi)
        return J1, J2
