"""Riccati recursion for the condensed, block-tridiagonal Newton system.

Stage ``i`` couples node ``i`` to node ``i + 1`` through the linearized
state equation ``A dx_i + B du_i + E dx_{i+1} = -F``; node ``0`` has the
initial-state row ``E0 dx_0 = -F0``. The stationarity rows are::

    Qxx dx_i + Qxu du_i + A^T dpi_{i+1} + E_i^T dpi_i = -qx
    Qux dx_i + Quu du_i + B^T dpi_{i+1}               = -qu
    QN dx_N + E_N^T dpi_N                             = -qN

``E`` is invertible (a difference-map Jacobian), so each stage is turned into
explicit form ``dx_{i+1} = Ah dx_i + Bh du_i + fh`` with ``T = -E^-1`` and the
recursion runs on ``rho_i = -E_i^T dpi_i = P_i dx_i + s_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class RiccatiError(np.linalg.LinAlgError):
    def __init__(self, message: str, stage: int):
        self.stage = stage
        super().__init__(message)


@dataclass
class LqrStage:
    Qxx: np.ndarray
    Qxu: np.ndarray
    Quu: np.ndarray
    qx: np.ndarray
    qu: np.ndarray
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    E: np.ndarray  # Jacobian of this stage's state equation w.r.t. the next node

    @property
    def nx(self) -> int:
        return self.qx.size

    @property
    def nu(self) -> int:
        return self.qu.size


@dataclass
class LqrSubproblem:
    stages: list
    E0: np.ndarray
    F0: np.ndarray
    QN: np.ndarray
    qN: np.ndarray

    @property
    def N(self) -> int:
        return len(self.stages)

    def E(self, i: int) -> np.ndarray:
        """Jacobian of the row entering node ``i`` w.r.t. ``dx_i``."""
        return self.E0 if i == 0 else self.stages[i - 1].E


@dataclass
class RiccatiSolution:
    P: list
    s: list
    K: list
    k: list
    dx: list
    du: list
    dpi: list = field(default_factory=list)


def _explicit(stage: LqrStage):
    T = -np.linalg.inv(stage.E)
    return T @ stage.A, T @ stage.B, T @ stage.F


def solve_riccati(sub: LqrSubproblem) -> RiccatiSolution:
    N = sub.N
    P = [None] * (N + 1)
    s = [None] * (N + 1)
    K = [None] * N
    k = [None] * N
    expl = [None] * N
    P[N] = 0.5 * (sub.QN + sub.QN.T)
    s[N] = sub.qN.copy()
    for i in range(N - 1, -1, -1):
        st = sub.stages[i]
        Ah, Bh, fh = _explicit(st)
        expl[i] = (Ah, Bh, fh)
        Pn, sn = P[i + 1], s[i + 1]
        PA = Pn @ Ah
        Fxx = st.Qxx + Ah.T @ PA
        mvec = Pn @ fh + sn
        fx = st.qx + Ah.T @ mvec
        if st.nu:
            PB = Pn @ Bh
            Fxu = st.Qxu + Ah.T @ PB
            Fuu = st.Quu + Bh.T @ PB
            fu = st.qu + Bh.T @ mvec
            try:
                cho = scipy.linalg.cho_factor(0.5 * (Fuu + Fuu.T), lower=True, check_finite=False)
            except np.linalg.LinAlgError:
                raise RiccatiError(
                    f"stage {i}: condensed input Hessian is not positive definite "
                    "(check the input cost weights)", i) from None
            K[i] = -scipy.linalg.cho_solve(cho, Fxu.T, check_finite=False)
            k[i] = -scipy.linalg.cho_solve(cho, fu, check_finite=False)
            Pi = Fxx + Fxu @ K[i]
            s[i] = fx + Fxu @ k[i]
        else:
            K[i] = np.zeros((0, st.nx))
            k[i] = np.zeros(0)
            Pi = Fxx
            s[i] = fx
        P[i] = 0.5 * (Pi + Pi.T)
    dx = [None] * (N + 1)
    du = [None] * N
    dpi = [None] * (N + 1)
    dx[0] = -np.linalg.solve(sub.E0, sub.F0)
    for i in range(N):
        Ah, Bh, fh = expl[i]
        du[i] = K[i] @ dx[i] + k[i]
        dx[i + 1] = Ah @ dx[i] + Bh @ du[i] + fh
    for i in range(N + 1):
        rho = P[i] @ dx[i] + s[i]
        dpi[i] = -np.linalg.solve(sub.E(i).T, rho)
    return RiccatiSolution(P, s, K, k, dx, du, dpi)


def _layout(sub: LqrSubproblem):
    """Offsets of (dpi_i, dx_i, du_i) in the dense unknown vector."""
    offs = []
    o = 0
    for st in sub.stages:
        nx, nu = st.nx, st.nu
        offs.append((o, o + nx, o + 2 * nx, nu))
        o += 2 * nx + nu
    nx = sub.qN.size
    offs.append((o, o + nx, o + 2 * nx, 0))
    return offs, o + 2 * nx


def assemble_dense_kkt(sub: LqrSubproblem) -> tuple[np.ndarray, np.ndarray]:
    """The full symmetric KKT matrix and right-hand side of the subproblem."""
    offs, dim = _layout(sub)
    Kmat = np.zeros((dim, dim))
    rhs = np.zeros(dim)

    def put(r, c, blk):
        Kmat[r: r + blk.shape[0], c: c + blk.shape[1]] += blk
        if r != c:
            Kmat[c: c + blk.shape[1], r: r + blk.shape[0]] += blk.T

    p0, x0, _, _ = offs[0]
    nx0 = sub.E0.shape[0]
    put(p0, x0, sub.E0)
    rhs[p0: p0 + nx0] = -sub.F0
    for i, st in enumerate(sub.stages):
        pi, xi, ui, nu = offs[i]
        pn, xn, _, _ = offs[i + 1]
        nx = st.nx
        put(xi, xi, 0.5 * (st.Qxx + st.Qxx.T))
        rhs[xi: xi + nx] = -st.qx
        if nu:
            put(xi, ui, st.Qxu)
            put(ui, ui, 0.5 * (st.Quu + st.Quu.T))
            rhs[ui: ui + nu] = -st.qu
            put(pn, ui, st.B)
        put(pn, xi, st.A)
        put(pn, xn, st.E)
        rhs[pn: pn + st.F.size] = -st.F
    _, xN, _, _ = offs[-1]
    put(xN, xN, 0.5 * (sub.QN + sub.QN.T))
    rhs[xN: xN + sub.qN.size] = -sub.qN
    return Kmat, rhs


def unpack_dense_solution(sub: LqrSubproblem, sol: np.ndarray):
    """Split a dense solution into ``(dx, du, dpi)`` lists."""
    offs, _ = _layout(sub)
    dx, du, dpi = [], [], []
    for i, (p, x, u, nu) in enumerate(offs):
        nx = sub.qN.size if i == sub.N else sub.stages[i].nx
        dpi.append(sol[p: p + nx])
        dx.append(sol[x: x + nx])
        if i < sub.N:
            du.append(sol[u: u + nu])
    return dx, du, dpi


def solve_dense(sub: LqrSubproblem):
    Kmat, rhs = assemble_dense_kkt(sub)
    sol = scipy.linalg.solve(Kmat, rhs, assume_a="sym")
    return unpack_dense_solution(sub, sol)
