"""Primal-dual interior-point bookkeeping for affine inequality rows ``g(y) >= 0``.

Each stage owns one :class:`IpmConstraintBlock` with ``g(y) = Jg y + g0``.
Slacks ``s`` and duals ``z`` stay strictly positive; the barrier parameter is
fixed for a whole solve. The Newton system of the barrier problem is reduced
to the primal variables by adding ``Jg^T (Z/S) Jg`` to the Hessian and a
barrier term to the gradient, so condensing downstream is unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAU = 0.995
SLACK_FLOOR = 1e-2


@dataclass
class IpmConstraintBlock:
    Jg: np.ndarray
    g0: np.ndarray
    s: np.ndarray
    z: np.ndarray
    eps: float

    @property
    def size(self) -> int:
        return self.g0.size

    def residual(self, y) -> np.ndarray:
        return self.Jg @ y + self.g0

    def copy(self) -> "IpmConstraintBlock":
        return IpmConstraintBlock(self.Jg, self.g0, self.s.copy(), self.z.copy(), self.eps)


def initialize_block(Jg, g0, y, eps: float) -> IpmConstraintBlock:
    """Barrier-consistent start: ``s = max(g(y), 1e-2)``, ``z = eps / s``."""
    if not eps > 0:
        raise ValueError("barrier parameter must be positive")
    Jg = np.asarray(Jg, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    g = Jg @ y + g0
    s = np.maximum(g, SLACK_FLOOR)
    return IpmConstraintBlock(Jg, g0, s, eps / s, eps)


def empty_block(ny: int, eps: float) -> IpmConstraintBlock:
    z = np.zeros(0)
    return IpmConstraintBlock(np.zeros((0, ny)), z, z.copy(), z.copy(), eps)


def stationarity_term(block: IpmConstraintBlock) -> np.ndarray:
    """Contribution ``-Jg^T z`` of the inequality rows to the Lagrangian gradient."""
    return -block.Jg.T @ block.z


def augment_stage(H: np.ndarray, grad: np.ndarray, block: IpmConstraintBlock, y) -> tuple[np.ndarray, np.ndarray]:
    """Barrier-augmented Hessian and gradient for the reduced Newton system.

    ``grad`` must exclude the inequality multipliers. The returned gradient
    replaces ``-Jg^T z`` by ``-Jg^T (eps - z (g - s)) / s``, which at a
    feasible point (``g = s``) is the log-barrier derivative.
    """
    if block.size == 0:
        return H, grad
    s, z = block.s, block.z
    g = block.residual(y)
    Jg = block.Jg
    H_aug = H + Jg.T @ ((z / s)[:, None] * Jg)
    grad_aug = grad - Jg.T @ ((block.eps - z * (g - s)) / s)
    return H_aug, grad_aug


def recover_slack_dual_steps(block: IpmConstraintBlock, y, dy) -> tuple[np.ndarray, np.ndarray]:
    s, z = block.s, block.z
    ds = block.Jg @ dy + (block.residual(y) - s)
    dz = (block.eps - s * z - z * ds) / s
    return ds, dz


def complementarity_residual(block: IpmConstraintBlock, y) -> np.ndarray:
    """Stacked ``g(y) - s`` and ``s z - eps``."""
    return np.concatenate([block.residual(y) - block.s, block.s * block.z - block.eps])


def max_step(x: np.ndarray, dx: np.ndarray, tau: float = TAU) -> float:
    neg = dx < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-tau * x[neg] / dx[neg])))


def fraction_to_boundary(s, ds, z, dz, tau: float = TAU) -> tuple[float, float]:
    """Largest primal and dual sizes in (0, 1] keeping ``s``, ``z`` above ``(1 - tau)`` times their value."""
    return max_step(np.asarray(s), np.asarray(ds), tau), max_step(np.asarray(z), np.asarray(dz), tau)
