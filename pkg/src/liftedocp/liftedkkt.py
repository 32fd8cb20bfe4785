"""Stage-wise KKT residuals, Gauss-Newton linearization, condensing and expansion.

Both stage kinds share one algebraic form. With ``c = dt`` at contact stages
and ``c = 1`` at impulse stages, stage ``i`` contributes::

    c l(x, w, u)                                    cost
    + pi_{i+1}^T F(x_i, w, x_{i+1})                 state equation
    + xi^T r(x, w, u)                               lifted dynamics rows

where ``w = (a, -f)`` (or ``(dv, -Lambda)``), ``r`` stacks the inverse
dynamics residual and the Baumgarte residual (or the impulse residual and
the post-impact contact velocity) and ``xi = c (beta, mu)``. Because ``r`` is
affine in ``w`` with the symmetric saddle matrix ``K = [[M, J^T], [J, O]]``,
``w`` and ``xi`` are eliminated locally through one factorization of ``K``.

The passive torques ``u0`` are held at zero; their multiplier ``nu`` is
recovered from the passive rows of ``beta``.

Costs have no cross terms between ``x``, ``w`` and ``u``; the inequality rows
act on ``(w, u)`` only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    ContactKktMatrix,
    SingularContactError,
    linearize_contact_stage,
    linearize_impulse_stage,
)
from .interiorpoint import (
    IpmConstraintBlock,
    augment_stage,
    complementarity_residual,
    recover_slack_dual_steps,
    stationarity_term,
)
from .lqr import LqrStage
from .ocpdef import OcpDefinition, stage_cost, terminal_cost


@dataclass
class LiftedStageIterate:
    """Primal-dual variables of stage ``i``.

    ``lmd``/``gmm`` multiply the state-equation rows entering node ``i`` (the
    initial-state rows for ``i = 0``). At impulse stages ``a`` holds the
    velocity change, ``f`` the impulse and ``u``/``u0``/``nu`` are empty.
    """

    kind: str
    q: np.ndarray
    v: np.ndarray
    a: np.ndarray
    f: np.ndarray
    u: np.ndarray
    u0: np.ndarray
    lmd: np.ndarray
    gmm: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    ipm: IpmConstraintBlock

    @property
    def dv(self) -> np.ndarray:
        return self.a

    @property
    def Lambda(self) -> np.ndarray:
        return self.f

    def copy(self) -> "LiftedStageIterate":
        return LiftedStageIterate(
            self.kind, self.q.copy(), self.v.copy(), self.a.copy(), self.f.copy(), self.u.copy(),
            self.u0.copy(), self.lmd.copy(), self.gmm.copy(), self.beta.copy(), self.mu.copy(),
            self.nu.copy(), self.ipm.copy(),
        )

    def y(self) -> np.ndarray:
        """Variables seen by the inequality rows: ``(a, -f, u)``."""
        return np.concatenate([self.a, -self.f, self.u])


@dataclass
class TerminalIterate:
    q: np.ndarray
    v: np.ndarray
    lmd: np.ndarray
    gmm: np.ndarray

    def copy(self) -> "TerminalIterate":
        return TerminalIterate(self.q.copy(), self.v.copy(), self.lmd.copy(), self.gmm.copy())


@dataclass
class StageKktResidual:
    state_eq: np.ndarray
    id_res: np.ndarray
    acc_res: np.ndarray
    passive_res: np.ndarray
    L_q: np.ndarray
    L_v: np.ndarray
    L_a: np.ndarray
    L_f: np.ndarray
    L_u: np.ndarray
    L_u0: np.ndarray
    ipm: np.ndarray

    def blocks(self):
        return (self.state_eq, self.id_res, self.acc_res, self.passive_res, self.L_q, self.L_v,
                self.L_a, self.L_f, self.L_u, self.L_u0, self.ipm)

    def squared_norm(self) -> float:
        return float(sum(b @ b for b in self.blocks()))


@dataclass
class StageLinearization:
    """Uncondensed Gauss-Newton data of one stage (``x = (q, v)``, ``w = (a, -f)``)."""

    i: int
    kind: str
    c: float
    lifted: bool
    n: int
    nf: int
    nu: int
    npas: int
    Hxx: np.ndarray
    Hww: np.ndarray
    Huu: np.ndarray
    L_x: np.ndarray
    L_w: np.ndarray      # includes -Jg^T z
    L_u: np.ndarray      # includes -Jg^T z
    L_u0: np.ndarray
    Phi_x: np.ndarray
    Phi_u: np.ndarray
    K: ContactKktMatrix
    r: np.ndarray
    A: np.ndarray
    F: np.ndarray
    E: np.ndarray        # Jacobian of F w.r.t. the next node
    E_in: np.ndarray     # Jacobian of the row entering this node
    ipm: IpmConstraintBlock
    y: np.ndarray
    cost: float

    def Cw(self) -> np.ndarray:
        """Jacobian of the state equation w.r.t. ``w``."""
        out = np.zeros((2 * self.n, self.n + self.nf))
        out[self.n:, : self.n] = self.c * np.eye(self.n)
        return out


@dataclass
class CondensedStageData:
    lqr: LqrStage
    lin: StageLinearization
    W_x: np.ndarray
    W_u: np.ndarray
    w0: np.ndarray
    Hyy: np.ndarray       # barrier-augmented Hessian of (w, u)
    g_newton: np.ndarray  # barrier-augmented gradient of (w, u)
    residual: StageKktResidual


def _state_equation(space, it: LiftedStageIterate, q_next, v_next, c, impulse):
    n = it.v.size
    D1, D2 = space.difference_jacobians(it.q, q_next)
    cv = 0.0 if impulse else c
    F = np.concatenate([space.difference(it.q, q_next) + cv * it.v, it.v - v_next + c * it.a])
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = D1
    A[:n, n:] = cv * np.eye(n)
    A[n:, n:] = np.eye(n)
    E = np.zeros((2 * n, 2 * n))
    E[:n, :n] = D2
    E[n:, n:] = -np.eye(n)
    return F, A, E


def incoming_jacobian(space, q_prev, q) -> np.ndarray:
    n = space.nv
    _, D2 = space.difference_jacobians(q_prev, q)
    E = np.zeros((2 * n, 2 * n))
    E[:n, :n] = D2
    E[n:, n:] = -np.eye(n)
    return E


def linearize_stage(
    defn: OcpDefinition,
    i: int,
    it: LiftedStageIterate,
    q_prev,
    nxt,
    lifted: bool = True,
) -> StageLinearization:
    """Residuals and first derivatives of stage ``i``.

    ``q_prev`` is the previous node's configuration (the initial
    configuration for ``i = 0``); ``nxt`` is the next stage iterate or the
    terminal iterate. With ``lifted=False`` the multipliers of the dynamics
    rows are ignored and ``(a, f)`` must already solve the contact dynamics.
    """
    model = defn.model
    space = model.space
    status = defn.status(i)
    impulse = defn.kind(i) == "impulse"
    c = 1.0 if impulse else defn.dt
    n = model.n
    npas = model.n_passive
    nf = it.f.size
    nu = it.u.size
    if impulse:
        sd = linearize_impulse_stage(model, it.q, it.v, it.a, it.f, status)
        r_id = sd.id_res
    else:
        sd = linearize_contact_stage(model, it.q, it.v, it.a, it.f, status, defn.baumgarte)
        r_id = sd.id_res.copy()
        r_id[npas:] -= it.u
        r_id[:npas] -= it.u0
    r = np.concatenate([r_id, sd.acc_res])
    try:
        K = ContactKktMatrix(sd.M, sd.J, row_frames=sd.row_frames)
    except SingularContactError as exc:
        raise SingularContactError(f"stage {i}: {exc}", exc.frames, stage=i) from None
    Phi_x = np.block([[sd.id_q, sd.id_v], [sd.acc_q, sd.acc_v]])
    Phi_u = np.zeros((n + nf, nu))
    if nu:
        Phi_u[npas:n] = -np.eye(nu)

    ce = stage_cost(defn, i, it.q, it.v, it.a, it.f, it.u, kin=sd.data)
    Hxx = np.zeros((2 * n, 2 * n))
    Hxx[:n, :n] = c * ce.Hqq
    Hxx[n:, n:] = c * ce.Hvv
    Hww = np.zeros((n + nf, n + nf))
    Hww[:n, :n] = c * ce.Haa
    Hww[n:, n:] = c * ce.Hff
    Huu = c * ce.Huu

    F, A, E = _state_equation(space, it, nxt.q, nxt.v, c, impulse)
    E_in = incoming_jacobian(space, q_prev, it.q)
    pi = np.concatenate([it.lmd, it.gmm])
    pi_next = np.concatenate([nxt.lmd, nxt.gmm])

    L_x = c * np.concatenate([ce.lq, ce.lv]) + A.T @ pi_next + E_in.T @ pi
    L_w = c * np.concatenate([ce.la, -ce.lf])
    L_w[:n] += c * nxt.gmm
    L_u = c * ce.lu
    L_u0 = np.zeros(0 if impulse else npas)
    if lifted:
        xi = c * np.concatenate([it.beta, it.mu])
        L_x += Phi_x.T @ xi
        L_w[:n] += sd.M @ xi[:n] + sd.J.T @ xi[n:]
        L_w[n:] += sd.J @ xi[:n]
        if nu:
            L_u -= xi[npas:n]
        if not impulse:
            L_u0 = c * (it.nu - it.beta[:npas])
    ineq = stationarity_term(it.ipm)
    L_w = L_w + ineq[: n + nf]
    L_u = L_u + ineq[n + nf:]
    return StageLinearization(
        i=i, kind=defn.kind(i), c=c, lifted=lifted, n=n, nf=nf, nu=nu, npas=npas,
        Hxx=Hxx, Hww=Hww, Huu=Huu, L_x=L_x, L_w=L_w, L_u=L_u, L_u0=L_u0,
        Phi_x=Phi_x, Phi_u=Phi_u, K=K, r=r if lifted else np.zeros_like(r),
        A=A, F=F, E=E, E_in=E_in, ipm=it.ipm, y=it.y(), cost=c * ce.value,
    )


def condense(lin: StageLinearization) -> CondensedStageData:
    """Eliminate ``w``, ``xi`` (and ``nu``) and emit the stage's LQR data."""
    n, nf, nu = lin.n, lin.nf, lin.nu
    nw = n + nf
    nx = 2 * n
    rhs = np.hstack([lin.Phi_x, lin.Phi_u, lin.r[:, None]])
    sol = lin.K.solve(rhs)
    W_x = -sol[:, :nx]
    W_u = -sol[:, nx: nx + nu]
    w0 = -sol[:, -1] if lin.lifted else np.zeros(nw)

    Hyy = np.zeros((nw + nu, nw + nu))
    Hyy[:nw, :nw] = lin.Hww
    Hyy[nw:, nw:] = lin.Huu
    # remove the true inequality term, then add the barrier Newton term
    g_true = np.concatenate([lin.L_w, lin.L_u])
    g_noineq = g_true - stationarity_term(lin.ipm)
    Hyy, g_newton = augment_stage(Hyy, g_noineq, lin.ipm, lin.y)
    Hww, Hwu, Huu = Hyy[:nw, :nw], Hyy[:nw, nw:], Hyy[nw:, nw:]
    gw, gu = g_newton[:nw], g_newton[nw:]

    HwwWx = Hww @ W_x
    HwwWu = Hww @ W_u + Hwu
    gw_tot = gw + Hww @ w0
    Qxx = lin.Hxx + W_x.T @ HwwWx
    Qxu = W_x.T @ HwwWu
    Quu = Huu + W_u.T @ HwwWu + Hwu.T @ W_u
    qx = lin.L_x + W_x.T @ gw_tot
    qu = gu + Hwu.T @ w0 + W_u.T @ gw_tot

    c = lin.c
    A = lin.A.copy()
    A[n:] += c * W_x[:n]
    B = np.zeros((nx, nu))
    B[n:] = c * W_u[:n]
    F = lin.F.copy()
    F[n:] += c * w0[:n]
    stage = LqrStage(0.5 * (Qxx + Qxx.T), Qxu, 0.5 * (Quu + Quu.T), qx, qu, A, B, F, lin.E)
    return CondensedStageData(stage, lin, W_x, W_u, w0, Hyy, g_newton, _residual(lin, W_x, W_u))


def _residual(lin: StageLinearization, W_x, W_u) -> StageKktResidual:
    n, nf, npas = lin.n, lin.nf, lin.npas
    ipm_res = complementarity_residual(lin.ipm, lin.y)
    if lin.lifted:
        L_x, L_w, L_u = lin.L_x, lin.L_w, lin.L_u
        r = lin.c * lin.r
        id_res, acc_res = r[:n], r[n:]
        passive = np.zeros(npas if lin.nu else 0)
    else:
        # the non-lifted problem only has (x, u); w is a function of them
        L_x = lin.L_x + W_x.T @ lin.L_w
        L_u = lin.L_u + W_u.T @ lin.L_w
        L_w = np.zeros(0)
        id_res = acc_res = passive = np.zeros(0)
    return StageKktResidual(
        state_eq=lin.F, id_res=id_res, acc_res=acc_res, passive_res=passive,
        L_q=L_x[:n], L_v=L_x[n:], L_a=L_w[:n], L_f=L_w[n:], L_u=L_u,
        L_u0=lin.L_u0 if lin.lifted else np.zeros(0), ipm=ipm_res,
    )


def condense_contact_stage(defn, i, iterate, q_prev, nxt, lifted: bool = True) -> CondensedStageData:
    if defn.kind(i) != "contact":
        raise ValueError(f"stage {i} is an impulse stage")
    return condense(linearize_stage(defn, i, iterate, q_prev, nxt, lifted))


def condense_impulse_stage(defn, j, iterate, q_prev, nxt, lifted: bool = True) -> CondensedStageData:
    if defn.kind(j) != "impulse":
        raise ValueError(f"stage {j} is a contact stage")
    return condense(linearize_stage(defn, j, iterate, q_prev, nxt, lifted))


def evaluate_stage_kkt(defn, i, iterate, q_prev, nxt, lifted: bool = True) -> StageKktResidual:
    return condense(linearize_stage(defn, i, iterate, q_prev, nxt, lifted)).residual


@dataclass
class StageStep:
    dx: np.ndarray
    du: np.ndarray
    dpi: np.ndarray
    dw: np.ndarray
    dxi: np.ndarray
    dnu: np.ndarray
    ds: np.ndarray
    dz: np.ndarray

    def split_w(self, n: int):
        """``(da, df)`` (or ``(d dv, d Lambda)``) from the ``w = (a, -f)`` step."""
        return self.dw[:n], -self.dw[n:]


def expand(data: CondensedStageData, dx, du, dpi, dpi_next) -> StageStep:
    """Recover the eliminated steps from the condensed solution."""
    lin = data.lin
    n, nf, nu = lin.n, lin.nf, lin.nu
    nw = n + nf
    dw = data.W_x @ dx + data.W_u @ du + data.w0
    if lin.lifted:
        Hww, Hwu = data.Hyy[:nw, :nw], data.Hyy[:nw, nw:]
        rhs = data.g_newton[:nw] + Hww @ dw + Hwu @ du
        rhs[:n] += lin.c * dpi_next[n:]
        dxi = -lin.K.solve(rhs)
        dnu = (dxi[: lin.npas] - lin.L_u0) / lin.c if lin.L_u0.size else np.zeros(0)
    else:
        dxi = np.zeros(nw)
        dnu = np.zeros(0)
    ds, dz = recover_slack_dual_steps(lin.ipm, lin.y, np.concatenate([dw, du]))
    return StageStep(dx=dx, du=du, dpi=dpi, dw=dw, dxi=dxi, dnu=dnu, ds=ds, dz=dz)


def expand_contact_stage(data: CondensedStageData, dq, dv, du, dpi_next, dpi=None):
    """``(da, df, dbeta, dmu, dnu)`` of a contact stage."""
    n = data.lin.n
    st = expand(data, np.concatenate([dq, dv]), du, dpi, dpi_next)
    da, df = st.split_w(n)
    c = data.lin.c
    return da, df, st.dxi[:n] / c, st.dxi[n:] / c, st.dnu


def expand_impulse_stage(data: CondensedStageData, dq, dv, dpi_next, dpi=None):
    """``(d dv, d Lambda, dbeta, dmu)`` of an impulse stage."""
    n = data.lin.n
    st = expand(data, np.concatenate([dq, dv]), np.zeros(0), dpi, dpi_next)
    ddv, dL = st.split_w(n)
    return ddv, dL, st.dxi[:n], st.dxi[n:]


# -- dense oracle over the whole horizon ------------------------------------------------

@dataclass
class _Blocks:
    offs: dict = field(default_factory=dict)
    dim: int = 0

    def add(self, key, size):
        self.offs[key] = (self.dim, size)
        self.dim += size


def assemble_uncondensed_kkt(lins: list, E0: np.ndarray, F0: np.ndarray, QN, LN):
    """Dense symmetric KKT system of the full lifted Newton step.

    Unknowns per stage are the costate step, ``dx``, ``dw``, ``du``,
    ``du0``, ``c dnu``, ``dxi``, ``ds`` and ``dz``; the inequality rows enter
    in the symmetric form ``[[H, 0, -Jg^T], [0, Z/S, I], [-Jg, I, 0]]``.
    Returns ``(matrix, rhs, layout)``.
    """
    lay = _Blocks()
    for lin in lins:
        i = lin.i
        nx, nw, nu = 2 * lin.n, lin.n + lin.nf, lin.nu
        npas = lin.L_u0.size
        m = lin.ipm.size
        for key, size in (("pi", nx), ("x", nx), ("w", nw), ("u", nu), ("u0", npas), ("nu", npas),
                          ("xi", nw), ("s", m), ("z", m)):
            lay.add((key, i), size)
    N = len(lins)
    nxN = QN.shape[0]
    lay.add(("pi", N), nxN)
    lay.add(("x", N), nxN)
    Kd = np.zeros((lay.dim, lay.dim))
    rhs = np.zeros(lay.dim)

    def sl(key):
        o, s = lay.offs[key]
        return slice(o, o + s)

    def put(rk, ck, blk):
        Kd[sl(rk), sl(ck)] += blk
        if rk != ck:
            Kd[sl(ck), sl(rk)] += blk.T

    put(("pi", 0), ("x", 0), E0)
    rhs[sl(("pi", 0))] = -F0
    for lin in lins:
        i = lin.i
        n, nw = lin.n, lin.n + lin.nf
        put(("x", i), ("x", i), lin.Hxx)
        put(("w", i), ("w", i), lin.Hww)
        if lin.nu:
            put(("u", i), ("u", i), lin.Huu)
        Kmat = lin.K.matrix()
        put(("xi", i), ("x", i), lin.Phi_x)
        put(("xi", i), ("w", i), Kmat)
        if lin.nu:
            put(("xi", i), ("u", i), lin.Phi_u)
        npas = lin.L_u0.size
        if npas:
            sel = np.zeros((nw, npas))
            sel[:npas] = -np.eye(npas)
            put(("xi", i), ("u0", i), sel)
            put(("nu", i), ("u0", i), np.eye(npas))
            rhs[sl(("u0", i))] = -lin.L_u0
            rhs[sl(("nu", i))] = 0.0  # u0 = 0 at every iterate
        put(("pi", i + 1), ("x", i), lin.A)
        put(("pi", i + 1), ("w", i), lin.Cw())
        put(("pi", i + 1), ("x", i + 1), lin.E)
        rhs[sl(("pi", i + 1))] = -lin.F
        rhs[sl(("x", i))] = -lin.L_x
        rhs[sl(("w", i))] = -lin.L_w
        if lin.nu:
            rhs[sl(("u", i))] = -lin.L_u
        rhs[sl(("xi", i))] = -lin.r
        blk = lin.ipm
        if blk.size:
            Jw, Ju = blk.Jg[:, :nw], blk.Jg[:, nw:]
            put(("z", i), ("w", i), -Jw)
            if lin.nu:
                put(("z", i), ("u", i), -Ju)
            put(("s", i), ("s", i), np.diag(blk.z / blk.s))
            put(("z", i), ("s", i), np.eye(blk.size))
            rhs[sl(("s", i))] = (blk.eps - blk.s * blk.z) / blk.s
            rhs[sl(("z", i))] = blk.residual(lin.y) - blk.s
    put(("x", N), ("x", N), QN)
    rhs[sl(("x", N))] = -LN
    return Kd, rhs, lay
