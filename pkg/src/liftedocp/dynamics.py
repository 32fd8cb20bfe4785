"""Rigid-body dynamics kernels with first-order tangent-space derivatives.

Spatial vectors are expressed in body coordinates with the ordering
``[linear; angular]``. Derivatives are propagated analytically through the
recursive passes: a perturbation of joint ``k`` along column ``s`` of its
motion subspace right-multiplies the child frame by ``exp(s)``, so every
transported motion vector ``y`` picks up ``y x s`` and every transported
force picks up ``s x* f``. Derivatives with respect to ``q`` are taken in the
tangent space used by :mod:`liftedocp.liegroup`.

Contact forces are world-frame point forces; for a contact frame that only
constrains some axes, the unconstrained components are zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .liegroup import quat_to_matrix, skew
from .robotmodel import ContactStatus, RobotModel


class SingularContactError(np.linalg.LinAlgError):
    """The contact Jacobian is rank deficient (e.g. coincident contact frames)."""

    def __init__(self, message: str, frames=(), stage: int | None = None):
        self.frames = tuple(frames)
        self.stage = stage
        super().__init__(message)


@dataclass(frozen=True)
class BaumgarteParams:
    alpha: float = 25.0
    beta: float = 25.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("Baumgarte parameters must be non-negative")


def crm(m: np.ndarray) -> np.ndarray:
    """Matrix of ``m x`` acting on motion vectors."""
    out = np.zeros((6, 6))
    W = skew(m[3:])
    out[:3, :3] = W
    out[:3, 3:] = skew(m[:3])
    out[3:, 3:] = W
    return out


def crf(m: np.ndarray) -> np.ndarray:
    """Matrix of ``m x*`` acting on force vectors."""
    return -crm(m).T


def crf_bar(f: np.ndarray) -> np.ndarray:
    """Matrix ``C`` with ``s x* f = C s`` for a fixed force ``f``."""
    out = np.zeros((6, 6))
    F = skew(f[:3])
    out[:3, 3:] = -F
    out[3:, :3] = -F
    out[3:, 3:] = -skew(f[3:])
    return out


def _motion_transform(R: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Transform motion vectors from parent to child coordinates.

    ``R``, ``p`` are the child frame's orientation and origin in the parent.
    """
    X = np.zeros((6, 6))
    Rt = R.T
    X[:3, :3] = Rt
    X[:3, 3:] = -Rt @ skew(p)
    X[3:, 3:] = Rt
    return X


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    K = skew(axis)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * K @ K


def _joint_placement(model: RobotModel, k: int, q: np.ndarray):
    jt = model.joints[k]
    qk = q[model.q_slices[k]]
    if jt.type == "floating":
        return quat_to_matrix(qk[3:7]), qk[:3].copy()
    Rp = model.placement_rotations[k]
    pp = model.placement_translations[k]
    if jt.type == "revolute":
        return Rp @ _axis_rotation(model.axes[k], qk[0]), pp
    return Rp, pp + Rp @ (model.axes[k] * qk[0])


class KinematicsData:
    """Per-body results of :func:`forward_pass` (all in body coordinates).

    Attributes
    ----------
    R, p : world orientation and origin of each body.
    X : motion transform parent -> body.
    vel, acc : spatial velocity and gravity-free spatial acceleration.
    jac : body Jacobian ``d vel / d v`` (6 x n), also the tangent map of the pose.
    dvel_dq, dacc_dq, dacc_dv : first derivatives (only with ``derivatives``).
    """

    def __init__(self, model: RobotModel, q, v, a, derivatives: bool):
        self.model = model
        self.q, self.v, self.a = q, v, a
        self.derivatives = derivatives
        nb = len(model.joints)
        self.R = [None] * nb
        self.p = [None] * nb
        self.X = [None] * nb
        self.vel = [None] * nb
        self.acc = [None] * nb
        self.jac = [None] * nb
        self.dvel_dq = [None] * nb
        self.dacc_dq = [None] * nb
        self.dacc_dv = [None] * nb


def forward_pass(model: RobotModel, q, v=None, a=None, derivatives: bool = False) -> KinematicsData:
    """Forward recursion for poses, velocities, accelerations and Jacobians."""
    n = model.n
    q = np.asarray(q, dtype=float)
    v = np.zeros(n) if v is None else np.asarray(v, dtype=float)
    a = np.zeros(n) if a is None else np.asarray(a, dtype=float)
    if q.shape != (model.nq,) or v.shape != (n,) or a.shape != (n,):
        raise ValueError("dimension mismatch in forward_pass")
    data = KinematicsData(model, q, v, a, derivatives)
    zero6 = np.zeros(6)
    zeroJ = np.zeros((6, n))
    for k in range(len(model.joints)):
        par = model.parents[k]
        S = model.motion_subspaces[k]
        cols = model.v_slices[k]
        Rrel, prel = _joint_placement(model, k, q)
        X = _motion_transform(Rrel, prel)
        if par < 0:
            R, p = Rrel, prel
            v_par, a_par, J_par = zero6, zero6, zeroJ
        else:
            R = data.R[par] @ Rrel
            p = data.p[par] + data.R[par] @ prel
            v_par, a_par, J_par = data.vel[par], data.acc[par], data.jac[par]
        vJ = S @ v[cols]
        Xv = X @ v_par
        Xa = X @ a_par
        vel = Xv + vJ
        acc = Xa + S @ a[cols] + crm(vel) @ vJ
        J = X @ J_par
        J[:, cols] += S
        data.R[k], data.p[k], data.X[k] = R, p, X
        data.vel[k], data.acc[k], data.jac[k] = vel, acc, J
        if derivatives:
            if par < 0:
                dvq = np.zeros((6, n))
                daq = np.zeros((6, n))
                dav = np.zeros((6, n))
            else:
                dvq = X @ data.dvel_dq[par]
                daq = X @ data.dacc_dq[par]
                dav = X @ data.dacc_dv[par]
            dvq[:, cols] += crm(Xv) @ S
            daq[:, cols] += crm(Xa) @ S
            cvJ = crm(vJ)
            daq -= cvJ @ dvq
            dav -= cvJ @ J
            dav[:, cols] += crm(vel) @ S
            data.dvel_dq[k], data.dacc_dq[k], data.dacc_dv[k] = dvq, daq, dav
    return data


@dataclass
class PointKinematics:
    """World-frame kinematics of one contact point (full 3-D, unselected)."""

    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    jacobian: np.ndarray  # d position / d q == d velocity / d v
    dvel_dq: np.ndarray | None = None
    dacc_dq: np.ndarray | None = None
    dacc_dv: np.ndarray | None = None


def point_kinematics(data: KinematicsData, body: int, offset: np.ndarray) -> PointKinematics:
    R = data.R[body]
    vel, acc, J = data.vel[body], data.acc[body], data.jac[body]
    w = vel[3:]
    r_hat = skew(offset)
    vp = vel[:3] + np.cross(w, offset)
    ap = acc[:3] + np.cross(acc[3:], offset) + np.cross(w, vp)
    Jp_body = J[:3] - r_hat @ J[3:]
    out = PointKinematics(
        position=data.p[body] + R @ offset,
        velocity=R @ vp,
        acceleration=R @ ap,
        jacobian=R @ Jp_body,
    )
    if data.derivatives:
        W = J[3:]
        dvq, daq, dav = data.dvel_dq[body], data.dacc_dq[body], data.dacc_dv[body]
        w_hat = skew(w)
        dvp_dq = dvq[:3] - r_hat @ dvq[3:]
        out.dvel_dq = R @ (dvp_dq - skew(vp) @ W)
        dap_dq = daq[:3] - r_hat @ daq[3:] + w_hat @ dvp_dq - skew(vp) @ dvq[3:]
        out.dacc_dq = R @ (dap_dq - skew(ap) @ W)
        dap_dv = dav[:3] - r_hat @ dav[3:] + w_hat @ Jp_body - skew(vp) @ J[3:]
        out.dacc_dv = R @ dap_dv
    return out


def _contact_points(model: RobotModel, data: KinematicsData, status: ContactStatus):
    pts = []
    for k in status.active_indices():
        pk = point_kinematics(data, model.contact_bodies[k], model.contact_offsets[k])
        pts.append((k, model.contact_frames[k].axis_indices, pk))
    return pts


def _external_forces(model: RobotModel, status: ContactStatus | None, f) -> dict[int, list[np.ndarray]]:
    """Map stacked active-contact forces to 3-D world forces per body."""
    out: dict[int, list] = {}
    if status is None or f is None:
        return out
    f = np.asarray(f, dtype=float)
    idx = 0
    for k in status.active_indices():
        axes = model.contact_frames[k].axis_indices
        F = np.zeros(3)
        F[list(axes)] = f[idx: idx + len(axes)]
        idx += len(axes)
        out.setdefault(model.contact_bodies[k], []).append((model.contact_offsets[k], F))
    if idx != f.size:
        raise ValueError(f"force vector has {f.size} entries, active contacts need {idx}")
    return out


def rnea_from_kinematics(
    model: RobotModel,
    data: KinematicsData,
    status: ContactStatus | None = None,
    f=None,
    gravity: bool = True,
    derivatives: bool = False,
):
    """Backward recursion; returns ``tau`` or ``(tau, tau_q, tau_v)``."""
    n = model.n
    nb = len(model.joints)
    g = model.gravity if gravity else np.zeros(3)
    ext = _external_forces(model, status, f)
    forces = [None] * nb
    dfq = [None] * nb
    dfv = [None] * nb
    for k in range(nb):
        I = model.inertias[k]
        vel = data.vel[k]
        R = data.R[k]
        g_body = R.T @ g
        acc = data.acc[k].copy()
        acc[:3] -= g_body
        Iv = I @ vel
        fk = I @ acc + crf(vel) @ Iv
        if derivatives:
            J = data.jac[k]
            W = J[3:]
            dvq = data.dvel_dq[k]
            dacc_q = data.dacc_dq[k].copy()
            dacc_q[:3] -= skew(g_body) @ W
            C = crf(vel) @ I + crf_bar(Iv)
            dq = I @ dacc_q + C @ dvq
            dv = I @ data.dacc_dv[k] + C @ J
        for offset, F in ext.get(k, ()):
            Fb = R.T @ F
            fk[:3] -= Fb
            fk[3:] -= np.cross(offset, Fb)
            if derivatives:
                dFb = skew(Fb) @ W
                dq[:3] -= dFb
                dq[3:] -= skew(offset) @ dFb
        forces[k] = fk
        if derivatives:
            dfq[k], dfv[k] = dq, dv
    tau = np.zeros(n)
    tau_q = np.zeros((n, n)) if derivatives else None
    tau_v = np.zeros((n, n)) if derivatives else None
    for k in range(nb - 1, -1, -1):
        S = model.motion_subspaces[k]
        cols = model.v_slices[k]
        fk = forces[k]
        tau[cols] = S.T @ fk
        if derivatives:
            tau_q[cols] = S.T @ dfq[k]
            tau_v[cols] = S.T @ dfv[k]
        par = model.parents[k]
        if par >= 0:
            Xt = data.X[k].T
            forces[par] = forces[par] + Xt @ fk
            if derivatives:
                dfq[par] = dfq[par] + Xt @ dfq[k]
                dfq[par][:, cols] += Xt @ crf_bar(fk) @ S
                dfv[par] = dfv[par] + Xt @ dfv[k]
    if derivatives:
        return tau, tau_q, tau_v
    return tau


def inverse_dynamics(model: RobotModel, q, v, a, f=None, status: ContactStatus | None = None) -> np.ndarray:
    """RNEA torque ``M(q) a + h(q, v) - J(q)^T f``."""
    data = forward_pass(model, q, v, a)
    return rnea_from_kinematics(model, data, status, f)


def bias(model: RobotModel, q, v) -> np.ndarray:
    """Coriolis, centrifugal and gravity terms ``h(q, v)``."""
    return inverse_dynamics(model, q, v, np.zeros(model.n))


def crba(model: RobotModel, data: KinematicsData) -> np.ndarray:
    n = model.n
    nb = len(model.joints)
    Ic = [I.copy() for I in model.inertias]
    for k in range(nb - 1, -1, -1):
        par = model.parents[k]
        if par >= 0:
            X = data.X[k]
            Ic[par] += X.T @ Ic[k] @ X
    M = np.zeros((n, n))
    for k in range(nb):
        S = model.motion_subspaces[k]
        ck = model.v_slices[k]
        F = Ic[k] @ S
        M[ck, ck] = S.T @ F
        j = k
        while model.parents[j] >= 0:
            F = data.X[j].T @ F
            j = model.parents[j]
            cj = model.v_slices[j]
            blk = model.motion_subspaces[j].T @ F
            M[cj, ck] = blk
            M[ck, cj] = blk.T
    return M


def mass_matrix(model: RobotModel, q) -> np.ndarray:
    """Joint-space inertia matrix by the composite-rigid-body algorithm."""
    return crba(model, forward_pass(model, q))


def contact_jacobian(model: RobotModel, data: KinematicsData, status: ContactStatus) -> np.ndarray:
    rows = [pk.jacobian[list(ax)] for _, ax, pk in _contact_points(model, data, status)]
    return np.vstack(rows) if rows else np.zeros((0, model.n))


def contact_kinematics(model: RobotModel, q, v, status: ContactStatus):
    """Stacked contact position error, Jacobian, velocity and ``Jdot v``."""
    data = forward_pass(model, q, v)
    p, J, pdot, jdv = [], [], [], []
    for k, ax, pk in _contact_points(model, data, status):
        ax = list(ax)
        p.append((pk.position - status.reference_positions[k])[ax])
        J.append(pk.jacobian[ax])
        pdot.append(pk.velocity[ax])
        jdv.append(pk.acceleration[ax])
    if not p:
        e = np.zeros(0)
        return e, np.zeros((0, model.n)), e, e
    return np.concatenate(p), np.vstack(J), np.concatenate(pdot), np.concatenate(jdv)


def _baumgarte_from_points(pts, status, params: BaumgarteParams, derivatives: bool):
    a2 = 2.0 * params.alpha
    b2 = params.beta ** 2
    res, J, res_q, res_v = [], [], [], []
    for k, ax, pk in pts:
        ax = list(ax)
        err = pk.position - status.reference_positions[k]
        res.append((pk.acceleration + a2 * pk.velocity + b2 * err)[ax])
        J.append(pk.jacobian[ax])
        if derivatives:
            res_q.append((pk.dacc_dq + a2 * pk.dvel_dq + b2 * pk.jacobian)[ax])
            res_v.append((pk.dacc_dv + a2 * pk.jacobian)[ax])
    return res, J, res_q, res_v


def baumgarte_residual(model: RobotModel, q, v, a, status: ContactStatus, params: BaumgarteParams) -> np.ndarray:
    """Stabilized contact acceleration ``J a + Jdot v + 2 alpha J v + beta^2 p``."""
    data = forward_pass(model, q, v, a)
    res, _, _, _ = _baumgarte_from_points(_contact_points(model, data, status), status, params, False)
    return np.concatenate(res) if res else np.zeros(0)


class ContactKktMatrix:
    """Factorization of the saddle matrix ``[[M, J^T], [J, O]]``.

    ``M`` is factored by Cholesky and the Schur complement ``J M^-1 J^T`` by a
    second Cholesky; a Schur pivot below ``pivot_tol`` is reported as a
    singular contact configuration.
    """

    def __init__(self, M: np.ndarray, J: np.ndarray, frame_names=(), row_frames=(), pivot_tol: float = 1e-10):
        self.M = M
        self.J = J
        self.n = M.shape[0]
        self.nf = J.shape[0]
        try:
            self._chol_M = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"mass matrix is not positive definite: {exc}") from None
        if self.nf:
            self._MinvJt = scipy.linalg.cho_solve(self._chol_M, J.T, check_finite=False)
            schur = J @ self._MinvJt
            schur = 0.5 * (schur + schur.T)
            L = np.zeros_like(schur)
            bad = []
            # unpivoted Cholesky so that small pivots can be traced to frames
            for i in range(self.nf):
                d = schur[i, i] - L[i, :i] @ L[i, :i]
                if d < pivot_tol:
                    bad.append(i)
                    d = max(d, pivot_tol)
                L[i, i] = np.sqrt(d)
                L[i + 1:, i] = (schur[i + 1:, i] - L[i + 1:, :i] @ L[i, :i]) / L[i, i]
            if bad:
                names = sorted({row_frames[i] for i in bad}) if row_frames else []
                raise SingularContactError(
                    f"rank-deficient contact Jacobian; offending frames: {', '.join(names) or bad}",
                    frames=names,
                )
            self._chol_S = (L, True)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``[[M, J^T], [J, O]] x = rhs`` for a vector or matrix ``rhs``."""
        rhs = np.asarray(rhs, dtype=float)
        top = rhs[: self.n]
        Minv_top = scipy.linalg.cho_solve(self._chol_M, top, check_finite=False)
        if not self.nf:
            return Minv_top
        bot = rhs[self.n:]
        y = scipy.linalg.cho_solve(self._chol_S, self.J @ Minv_top - bot, check_finite=False)
        x = Minv_top - self._MinvJt @ y
        return np.concatenate([x, y], axis=0)

    def matrix(self) -> np.ndarray:
        K = np.zeros((self.n + self.nf, self.n + self.nf))
        K[: self.n, : self.n] = self.M
        K[: self.n, self.n:] = self.J.T
        K[self.n:, : self.n] = self.J
        return K


def _row_frames(model: RobotModel, status: ContactStatus) -> list[str]:
    rows = []
    for k in status.active_indices():
        cf = model.contact_frames[k]
        rows += [cf.name] * len(cf.axes)
    return rows


def factorize_contact_kkt(model: RobotModel, q, status: ContactStatus) -> ContactKktMatrix:
    data = forward_pass(model, q)
    M = crba(model, data)
    J = contact_jacobian(model, data, status)
    return ContactKktMatrix(M, J, row_frames=_row_frames(model, status))


def contact_dynamics(model: RobotModel, q, v, u, status: ContactStatus, params: BaumgarteParams):
    """Contact-consistent forward dynamics; returns ``(a, f)``."""
    data = forward_pass(model, q, v)
    M = crba(model, data)
    h = rnea_from_kinematics(model, data)
    pts = _contact_points(model, data, status)
    res, J, _, _ = _baumgarte_from_points(pts, status, params, False)
    J = np.vstack(J) if J else np.zeros((0, model.n))
    b = np.concatenate(res) if res else np.zeros(0)  # a = 0 in the pass, so this is b(q, v)
    K = ContactKktMatrix(M, J, row_frames=_row_frames(model, status))
    tau = -h
    tau[model.n_passive:] += u
    sol = K.solve(np.concatenate([tau, -b]))
    return sol[: model.n], -sol[model.n:]


def impulse_dynamics(model: RobotModel, q, v, status: ContactStatus):
    """Inelastic impact; returns ``(dv, Lambda)`` with ``J (v + dv) = 0``."""
    data = forward_pass(model, q)
    M = crba(model, data)
    J = contact_jacobian(model, data, status)
    K = ContactKktMatrix(M, J, row_frames=_row_frames(model, status))
    sol = K.solve(np.concatenate([np.zeros(model.n), -J @ v]))
    return sol[: model.n], -sol[model.n:]


@dataclass
class DynamicsDerivatives:
    ID_q: np.ndarray
    ID_v: np.ndarray
    ID_a: np.ndarray
    ID_f: np.ndarray
    a_q: np.ndarray
    a_v: np.ndarray
    a_a: np.ndarray


def dynamics_derivatives(model: RobotModel, q, v, a, f, status: ContactStatus, params: BaumgarteParams) -> DynamicsDerivatives:
    """Jacobians of inverse dynamics and the Baumgarte residual."""
    data = forward_pass(model, q, v, a, derivatives=True)
    _, ID_q, ID_v = rnea_from_kinematics(model, data, status, f, derivatives=True)
    M = crba(model, data)
    pts = _contact_points(model, data, status)
    _, J, rq, rv = _baumgarte_from_points(pts, status, params, True)
    J = np.vstack(J) if J else np.zeros((0, model.n))
    a_q = np.vstack(rq) if rq else np.zeros((0, model.n))
    a_v = np.vstack(rv) if rv else np.zeros((0, model.n))
    return DynamicsDerivatives(ID_q, ID_v, M, -J.T, a_q, a_v, J)


@dataclass
class ImpulseDerivatives:
    Gamma_q: np.ndarray
    Gamma_v: np.ndarray
    Gamma_dv: np.ndarray
    Gamma_Lambda: np.ndarray
    v_q: np.ndarray
    v_v: np.ndarray
    v_dv: np.ndarray


def impulse_derivatives(model: RobotModel, q, v, dv, Lambda, status: ContactStatus) -> ImpulseDerivatives:
    """Jacobians of ``M dv - J^T Lambda`` and ``J (v + dv)``."""
    n = model.n
    # Gamma(q) = ID with zero velocity, acceleration dv and no gravity
    data = forward_pass(model, q, np.zeros(n), dv, derivatives=True)
    _, G_q, _ = rnea_from_kinematics(model, data, status, Lambda, gravity=False, derivatives=True)
    M = crba(model, data)
    data_v = forward_pass(model, q, np.asarray(v) + np.asarray(dv), None, derivatives=True)
    pts = _contact_points(model, data_v, status)
    J = np.vstack([pk.jacobian[list(ax)] for _, ax, pk in pts]) if pts else np.zeros((0, n))
    v_q = np.vstack([pk.dvel_dq[list(ax)] for _, ax, pk in pts]) if pts else np.zeros((0, n))
    return ImpulseDerivatives(G_q, np.zeros((n, n)), M, -J.T, v_q, J, J)


def center_of_mass(model: RobotModel, data: KinematicsData):
    """World center of mass and its tangent-space Jacobian (3 x n)."""
    com = np.zeros(3)
    J = np.zeros((3, model.n))
    for k in range(len(model.joints)):
        m = model.link_masses[k]
        c = model.link_coms[k]
        R = data.R[k]
        Jb = data.jac[k]
        com += m * (data.p[k] + R @ c)
        J += m * (R @ (Jb[:3] - skew(c) @ Jb[3:]))
    return com / model.total_mass, J / model.total_mass


@dataclass
class StageDynamics:
    """Values and first derivatives of one stage's dynamics constraints.

    ``id_res`` is ``ID(q, v, a, f)`` (or ``M dv - J^T Lambda`` at an impulse)
    before the actuation term is subtracted; ``acc_res`` is the Baumgarte
    residual (or ``J (v + dv)``).
    """

    id_res: np.ndarray
    id_q: np.ndarray
    id_v: np.ndarray
    M: np.ndarray
    J: np.ndarray
    acc_res: np.ndarray
    acc_q: np.ndarray
    acc_v: np.ndarray
    data: KinematicsData
    row_frames: list


def linearize_contact_stage(model: RobotModel, q, v, a, f, status: ContactStatus, params: BaumgarteParams) -> StageDynamics:
    data = forward_pass(model, q, v, a, derivatives=True)
    tau, tau_q, tau_v = rnea_from_kinematics(model, data, status, f, derivatives=True)
    M = crba(model, data)
    pts = _contact_points(model, data, status)
    res, J, rq, rv = _baumgarte_from_points(pts, status, params, True)
    n = model.n
    if J:
        J, res, rq, rv = np.vstack(J), np.concatenate(res), np.vstack(rq), np.vstack(rv)
    else:
        J, res, rq, rv = np.zeros((0, n)), np.zeros(0), np.zeros((0, n)), np.zeros((0, n))
    return StageDynamics(tau, tau_q, tau_v, M, J, res, rq, rv, data, _row_frames(model, status))


def linearize_impulse_stage(model: RobotModel, q, v, dv, Lambda, status: ContactStatus) -> StageDynamics:
    n = model.n
    v = np.asarray(v, dtype=float)
    dv = np.asarray(dv, dtype=float)
    data = forward_pass(model, q, np.zeros(n), dv, derivatives=True)
    gam, gam_q, _ = rnea_from_kinematics(model, data, status, Lambda, gravity=False, derivatives=True)
    M = crba(model, data)
    data_v = forward_pass(model, q, v + dv, None, derivatives=True)
    pts = _contact_points(model, data_v, status)
    if pts:
        J = np.vstack([pk.jacobian[list(ax)] for _, ax, pk in pts])
        vq = np.vstack([pk.dvel_dq[list(ax)] for _, ax, pk in pts])
        res = np.concatenate([pk.velocity[list(ax)] for _, ax, pk in pts])
    else:
        J, vq, res = np.zeros((0, n)), np.zeros((0, n)), np.zeros(0)
    return StageDynamics(gam, gam_q, np.zeros((n, n)), M, J, res, vq, J, data_v, _row_frames(model, status))
