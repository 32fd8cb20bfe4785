"""Optimal-control problem definitions: contact schedules, costs, constraints, gaits.

A horizon has ``N`` stages. Stage ``i`` is either a *contact* stage of
duration ``dt`` with the contact status ``schedule.statuses[i]``, or an
*impulse* stage (``i`` in ``schedule.impulse_set``) of zero duration whose
status lists the frames touching down at that instant. Node ``N`` carries the
terminal cost.

Scenario files
--------------
UTF-8 text with one ``key = value`` per line; ``#`` starts a comment.
Recognized keys (all optional except ``gait``):

======================  =====================================================
``name``                scenario label used in reports
``gait``                ``trot``, ``jump``, ``hop``, ``stand`` or ``swingup``
``model``               path to a model file (relative to the scenario file);
                        default is the builtin robot of the gait
``N``                   stage count; must equal the count implied by the gait
``dt``                  stage duration in seconds
``mu``                  friction coefficient (0 disables the cone)
``alpha``, ``beta``     Baumgarte parameters in 1/s
``eps``                 barrier parameter
``mode``                ``lifted``, ``nonlifted`` or ``both``
``max_iters``, ``tol``  solver limits
``torque_limit``        symmetric actuator bound in N m (0 disables it)
``contact_penalty``     weight of the touchdown position penalty
``distance``            forward travel of the gait in m
``step_height``         swing-foot apex height in m
``w_base_pos``          weight on base (or passive) position tracking
``w_base_rot``          weight on base orientation tracking
``w_joint``             weight on actuated joint tracking
``w_v``                 velocity weight
``w_a``                 acceleration (and impulse velocity change) weight
``w_f``                 contact force (and impulse) weight
``w_u``                 torque weight
``w_foot``              swing-foot position weight
``w_com``               center-of-mass weight
``w_terminal``          multiplier on the state weights at the final node
======================  =====================================================

Shipped weights are tuned for convergence of the desk-scale examples; they
are not taken from any published experiment.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .dynamics import (
    BaumgarteParams,
    KinematicsData,
    center_of_mass,
    forward_pass,
    inverse_dynamics,
    point_kinematics,
)
from .robotmodel import (
    QUADRUPED_LEGS,
    ContactStatus,
    RobotModel,
    builtin_monoped,
    builtin_pendulum,
    builtin_quadruped,
    load_model_file,
    monoped_standing_configuration,
    quadruped_standing_configuration,
)

_SQRT2 = np.sqrt(2.0)


# -- constraints -----------------------------------------------------------------

@dataclass(frozen=True)
class FrictionCone:
    mu: float = 0.7

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("friction coefficient must be positive")


def friction_cone_residual(f_contact, mu: float) -> np.ndarray:
    """Left-hand sides of the pyramidal friction cone; feasible when all >= 0."""
    fx, fy, fz = np.asarray(f_contact, dtype=float)
    m = mu / _SQRT2 * fz
    return np.array([fx + m, -fx + m, fy + m, -fy + m, fz])


def friction_cone_matrix(mu: float, axes: str = "xyz") -> np.ndarray:
    """Rows ``C`` with ``C f_axes >= 0`` for a contact constraining ``axes``.

    Tangential rows are kept only for constrained tangential axes; with all
    three axes this is the linear map of :func:`friction_cone_residual`.
    A contact without a normal (z) component has no cone.
    """
    if "z" not in axes:
        return np.zeros((0, len(axes)))
    iz = axes.index("z")
    m = mu / _SQRT2
    rows = []
    for t in "xy":
        if t in axes:
            it = axes.index(t)
            for sgn in (1.0, -1.0):
                r = np.zeros(len(axes))
                r[it] = sgn
                r[iz] = m
                rows.append(r)
    r = np.zeros(len(axes))
    r[iz] = 1.0
    rows.append(r)
    return np.array(rows)


# -- schedule --------------------------------------------------------------------

@dataclass
class ContactSchedule:
    statuses: list
    impulse_set: frozenset = frozenset()

    def __post_init__(self):
        self.statuses = list(self.statuses)
        self.impulse_set = frozenset(int(j) for j in self.impulse_set)

    @property
    def N(self) -> int:
        return len(self.statuses)

    def kind(self, i: int) -> str:
        return "impulse" if i in self.impulse_set else "contact"

    def validate(self, model: RobotModel):
        N = self.N
        for j in sorted(self.impulse_set):
            if not 0 < j < N - 1:
                raise ValueError(f"impulse stage {j} must have contact stages on both sides")
            if j - 1 in self.impulse_set or j + 1 in self.impulse_set:
                raise ValueError(f"impulse stages {j} and a neighbor are adjacent")
            imp = self.statuses[j]
            if imp.num_active == 0:
                raise ValueError(f"impulse stage {j} has no touching-down frame")
            before, after = self.statuses[j - 1], self.statuses[j + 1]
            for k in imp.active_indices():
                if before.active[k] or not after.active[k]:
                    raise ValueError(
                        f"impulse stage {j}: frame '{model.contact_frames[k].name}' does not switch to active"
                    )


# -- costs -----------------------------------------------------------------------

@dataclass
class StageCost:
    """Weighted least-squares tracking terms of one stage (diagonal weights).

    At impulse stages ``w_a``/``w_f`` weight the velocity change and the
    impulse, and ``w_u`` is ignored.
    """

    q_ref: np.ndarray | None = None
    w_q: np.ndarray | None = None
    v_ref: np.ndarray | None = None
    w_v: np.ndarray | None = None
    w_a: np.ndarray | None = None
    f_ref: np.ndarray | None = None
    w_f: np.ndarray | None = None
    u_ref: np.ndarray | None = None
    w_u: np.ndarray | None = None
    foot_refs: dict = field(default_factory=dict)  # frame index -> world position
    w_foot: float = 0.0
    com_ref: np.ndarray | None = None
    w_com: float = 0.0


@dataclass
class TerminalCost:
    q_ref: np.ndarray | None = None
    w_q: np.ndarray | None = None
    v_ref: np.ndarray | None = None
    w_v: np.ndarray | None = None


@dataclass
class OcpDefinition:
    model: RobotModel
    N: int
    dt: float
    schedule: ContactSchedule
    stage_costs: list
    terminal_cost: TerminalCost
    friction: FrictionCone | None = None
    torque_limit: float | None = None
    baumgarte: BaumgarteParams = field(default_factory=BaumgarteParams)
    contact_position_penalty_weight: float = 1e3
    name: str = ""
    reference_q: np.ndarray | None = None  # (N + 1) x nq, used for initial guesses
    reference_v: np.ndarray | None = None  # (N + 1) x n

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.schedule.N != self.N or len(self.stage_costs) != self.N:
            raise ValueError("schedule and stage costs must have N entries")
        if self.contact_position_penalty_weight < 0:
            raise ValueError("contact position penalty weight must be non-negative")
        if self.torque_limit is not None and not self.torque_limit > 0:
            raise ValueError("torque limit must be positive")
        self.schedule.validate(self.model)
        for i, c in enumerate(self.stage_costs):
            for name in ("w_q", "w_v", "w_a", "w_f", "w_u"):
                w = getattr(c, name)
                if w is not None and np.any(np.asarray(w) < 0):
                    raise ValueError(f"stage {i}: weight {name} has negative entries")
            if c.w_foot < 0 or c.w_com < 0:
                raise ValueError(f"stage {i}: negative task weight")
        for name in ("w_q", "w_v"):
            w = getattr(self.terminal_cost, name)
            if w is not None and np.any(np.asarray(w) < 0):
                raise ValueError(f"terminal weight {name} has negative entries")

    def kind(self, i: int) -> str:
        return self.schedule.kind(i)

    def stage_dt(self, i: int) -> float:
        return 0.0 if i in self.schedule.impulse_set else self.dt

    def status(self, i: int) -> ContactStatus:
        return self.schedule.statuses[i]


@dataclass
class CostEval:
    """Value, gradients and Gauss-Newton Hessian blocks of a stage cost.

    The cost has no cross terms between ``q``, ``v``, ``a``, ``f`` and ``u``.
    """

    value: float
    lq: np.ndarray
    lv: np.ndarray
    la: np.ndarray
    lf: np.ndarray
    lu: np.ndarray
    Hqq: np.ndarray
    Hvv: np.ndarray
    Haa: np.ndarray
    Hff: np.ndarray
    Huu: np.ndarray


def _add_ls(value, grad, hess, r, w, Jr):
    """Accumulate ``0.5 r^T W r`` with a diagonal ``W`` and residual Jacobian ``Jr``."""
    wr = w * r
    value += 0.5 * float(r @ wr)
    grad += Jr.T @ wr
    hess += Jr.T @ (w[:, None] * Jr)
    return value


def stage_cost(defn: OcpDefinition, i: int, q, v, a_or_dv, f_or_Lambda, u=None, kin: KinematicsData | None = None) -> CostEval:
    model = defn.model
    n = model.n
    c = defn.stage_costs[i]
    impulse = defn.kind(i) == "impulse"
    status = defn.status(i)
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    a = np.asarray(a_or_dv, dtype=float)
    f = np.asarray(f_or_Lambda, dtype=float)
    nf = f.size
    nu = 0 if impulse else model.n_a
    value = 0.0
    lq, lv, la, lf, lu = np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(nf), np.zeros(nu)
    Hqq, Hvv, Haa = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))
    Hff, Huu = np.zeros((nf, nf)), np.zeros((nu, nu))
    if c.w_q is not None:
        dq = model.space.difference(q, c.q_ref)
        J1, _ = model.space.difference_jacobians(q, c.q_ref)
        value = _add_ls(value, lq, Hqq, dq, np.asarray(c.w_q, dtype=float), J1)
    if c.w_v is not None:
        ref = np.zeros(n) if c.v_ref is None else c.v_ref
        value = _add_ls(value, lv, Hvv, v - ref, np.asarray(c.w_v, dtype=float), np.eye(n))
    if c.w_a is not None:
        value = _add_ls(value, la, Haa, a, np.asarray(c.w_a, dtype=float), np.eye(n))
    if c.w_f is not None and nf:
        ref = np.zeros(nf) if c.f_ref is None else c.f_ref
        w = np.asarray(c.w_f, dtype=float)
        w = np.full(nf, float(w)) if w.ndim == 0 else w
        value = _add_ls(value, lf, Hff, f - ref, w, np.eye(nf))
    if not impulse and c.w_u is not None:
        ref = np.zeros(nu) if c.u_ref is None else c.u_ref
        value = _add_ls(value, lu, Huu, u - ref, np.asarray(c.w_u, dtype=float), np.eye(nu))
    need_feet = (c.w_foot > 0 and c.foot_refs) or (impulse and defn.contact_position_penalty_weight > 0)
    if need_feet or c.w_com > 0:
        if kin is None:
            kin = forward_pass(model, q)
        if c.w_foot > 0:
            for k, ref in c.foot_refs.items():
                pk = point_kinematics(kin, model.contact_bodies[k], model.contact_offsets[k])
                value = _add_ls(value, lq, Hqq, pk.position - ref, np.full(3, c.w_foot), pk.jacobian)
        if impulse and defn.contact_position_penalty_weight > 0:
            w = defn.contact_position_penalty_weight
            for k in status.active_indices():
                ax = list(model.contact_frames[k].axis_indices)
                pk = point_kinematics(kin, model.contact_bodies[k], model.contact_offsets[k])
                r = (pk.position - status.reference_positions[k])[ax]
                value = _add_ls(value, lq, Hqq, r, np.full(len(ax), w), pk.jacobian[ax])
        if c.w_com > 0:
            com, Jc = center_of_mass(model, kin)
            value = _add_ls(value, lq, Hqq, com - c.com_ref, np.full(3, c.w_com), Jc)
    return CostEval(value, lq, lv, la, lf, lu, Hqq, Hvv, Haa, Hff, Huu)


def terminal_cost(defn: OcpDefinition, q, v):
    """``(value, lq, lv, Hqq, Hvv)`` of the terminal term."""
    model = defn.model
    n = model.n
    c = defn.terminal_cost
    value = 0.0
    lq, lv, Hqq, Hvv = np.zeros(n), np.zeros(n), np.zeros((n, n)), np.zeros((n, n))
    if c.w_q is not None:
        dq = model.space.difference(q, c.q_ref)
        J1, _ = model.space.difference_jacobians(q, c.q_ref)
        value = _add_ls(value, lq, Hqq, dq, np.asarray(c.w_q, dtype=float), J1)
    if c.w_v is not None:
        ref = np.zeros(n) if c.v_ref is None else c.v_ref
        value = _add_ls(value, lv, Hvv, np.asarray(v) - ref, np.asarray(c.w_v, dtype=float), np.eye(n))
    return value, lq, lv, Hqq, Hvv


# -- reference helpers -------------------------------------------------------------

def foot_positions(model: RobotModel, q) -> np.ndarray:
    data = forward_pass(model, q)
    return np.array(
        [point_kinematics(data, b, o).position for b, o in zip(model.contact_bodies, model.contact_offsets)]
    )


def solve_ik(model: RobotModel, q, targets: dict, iters: int = 30, tol: float = 1e-10) -> np.ndarray:
    """Move the actuated joints so that contact frames reach ``targets``.

    Gauss-Newton with a small damping term; the passive coordinates are held.
    """
    q = np.array(q, dtype=float)
    cols = slice(model.n_passive, model.n)
    for _ in range(iters):
        data = forward_pass(model, q)
        res, rows = [], []
        for k, target in targets.items():
            pk = point_kinematics(data, model.contact_bodies[k], model.contact_offsets[k])
            ax = list(model.contact_frames[k].axis_indices)
            res.append((pk.position - target)[ax])
            rows.append(pk.jacobian[ax, cols])
        r = np.concatenate(res)
        if r @ r < tol**2:
            break
        Jr = np.vstack(rows)
        dq = -np.linalg.solve(Jr.T @ Jr + 1e-9 * np.eye(Jr.shape[1]), Jr.T @ r)
        d = np.zeros(model.n)
        d[cols] = dq
        q = model.space.integrate(q, d)
    return q


def reference_velocities(model: RobotModel, qs: np.ndarray, dts) -> np.ndarray:
    """Finite-difference velocities between consecutive reference configurations."""
    vs = np.zeros((len(qs), model.n))
    for i, dt in enumerate(dts):
        if dt > 0:
            vs[i] = model.space.difference(qs[i + 1], qs[i]) / dt
        else:
            vs[i] = vs[i - 1] if i > 0 else 0.0
    return vs


# -- gaits ---------------------------------------------------------------------------

GAITS = ("trot", "jump", "hop", "stand", "swingup")

_DEFAULTS = {
    "trot": dict(dt=0.02, distance=0.2, step_height=0.08, w_base_pos=100.0, w_base_rot=100.0, w_joint=1.0,
                 w_v=1.0, w_a=1e-3, w_f=1e-4, w_u=1e-2, w_foot=1e4, w_com=0.0, w_terminal=10.0),
    "jump": dict(dt=0.01, distance=0.5, step_height=0.0, w_base_pos=1e5, w_base_rot=1e5, w_joint=1e3,
                 w_v=1e3, w_a=1.0, w_f=0.1, w_u=10.0, w_foot=1e7, w_com=0.0, w_terminal=10.0),
    "hop": dict(dt=0.02, distance=0.05, step_height=0.0, w_base_pos=100.0, w_base_rot=100.0, w_joint=1.0,
                w_v=1.0, w_a=1e-3, w_f=1e-4, w_u=1e-2, w_foot=1e3, w_com=0.0, w_terminal=10.0),
    "stand": dict(dt=0.02, distance=0.0, step_height=0.0, w_base_pos=100.0, w_base_rot=100.0, w_joint=1.0,
                  w_v=1.0, w_a=1e-3, w_f=1e-4, w_u=1e-2, w_foot=0.0, w_com=0.0, w_terminal=10.0),
    "swingup": dict(dt=0.1, distance=0.0, step_height=0.0, w_base_pos=0.0, w_base_rot=0.0, w_joint=1.0,
                    w_v=0.1, w_a=0.0, w_f=0.0, w_u=1e-1, w_foot=0.0, w_com=0.0, w_terminal=100.0),
}
_COMMON_DEFAULTS = dict(mu=0.7, alpha=25.0, beta=25.0, torque_limit=80.0, contact_penalty=1e3)


def _state_weights(model: RobotModel, p: dict) -> np.ndarray:
    w = np.full(model.n, p["w_joint"])
    if model.floating_base:
        w[:3] = p["w_base_pos"]
        w[3:6] = p["w_base_rot"]
    else:
        w[: model.n_passive] = p["w_base_pos"]
    return w


def _phases_to_schedule(model, phases, foot_refs):
    """``phases`` is a list of (kind, active-tuple, length); refs per stage index."""
    statuses, impulses, active_per_stage = [], set(), []
    i = 0
    for kind, active, length in phases:
        for _ in range(length):
            if kind == "impulse":
                impulses.add(i)
            active_per_stage.append(active)
            statuses.append(ContactStatus.make(model, active, foot_refs[i]))
            i += 1
    return ContactSchedule(statuses, frozenset(impulses))


def _build_from_plan(model, p, phases, base_traj, foot_traj, name, q_nominal):
    """Assemble an OCP from a phase plan and reference trajectories.

    ``base_traj(i)`` modifies the nominal configuration for node i (the
    passive coordinates), ``foot_traj(i)`` returns an (n_frames x 3) array of
    foot references for node i.
    """
    N = sum(length for _, _, length in phases)
    kinds = []
    for kind, _, length in phases:
        kinds += [kind] * length
    dts = [0.0 if k == "impulse" else p["dt"] for k in kinds]
    feet = np.array([foot_traj(i) for i in range(N + 1)])
    schedule = _phases_to_schedule(model, phases, feet)
    qs = []
    for i in range(N + 1):
        qb = base_traj(i, q_nominal.copy())
        targets = {k: feet[i, k] for k in range(len(model.contact_frames))}
        qs.append(solve_ik(model, qb, targets) if targets else qb)
    qs = np.array(qs)
    vs = reference_velocities(model, qs, dts)
    vs[-1] = 0.0
    wq = _state_weights(model, p)
    wv = np.full(model.n, p["w_v"])
    costs = []
    for i in range(N):
        st = schedule.statuses[i]
        impulse = kinds[i] == "impulse"
        nf = model.contact_dim(st)
        swing = {}
        if not impulse and p["w_foot"] > 0:
            swing = {k: feet[i, k] for k in range(len(model.contact_frames)) if not st.active[k]}
        f_ref = u_ref = None
        if not impulse:
            u_ref, f_ref = gravity_compensation(model, qs[i], st)
            f_ref = f_ref if nf else None
        costs.append(
            StageCost(
                q_ref=qs[i], w_q=wq, v_ref=vs[i], w_v=wv,
                w_a=np.full(model.n, p["w_a"]) if p["w_a"] > 0 else None,
                f_ref=f_ref, w_f=np.full(nf, p["w_f"]) if (p["w_f"] > 0 and nf) else None,
                u_ref=u_ref, w_u=np.full(model.n_a, p["w_u"]),
                foot_refs=swing, w_foot=p["w_foot"] if swing else 0.0,
            )
        )
    term = TerminalCost(q_ref=qs[-1], w_q=p["w_terminal"] * wq, v_ref=np.zeros(model.n), w_v=p["w_terminal"] * wv)
    mu = p["mu"]
    tl = p["torque_limit"]
    return OcpDefinition(
        model=model, N=N, dt=p["dt"], schedule=schedule, stage_costs=costs, terminal_cost=term,
        friction=FrictionCone(mu) if mu > 0 else None,
        torque_limit=tl if tl > 0 else None,
        baumgarte=BaumgarteParams(p["alpha"], p["beta"]),
        contact_position_penalty_weight=p["contact_penalty"],
        name=name, reference_q=qs, reference_v=vs,
    )


def _quadruped_jump(model, p):
    n_stance, n_flight, n_land = 20, 25, 25
    all4, none4 = (True,) * 4, (False,) * 4
    phases = [("contact", all4, n_stance), ("contact", none4, n_flight), ("impulse", all4, 1), ("contact", all4, n_land)]
    q0 = quadruped_standing_configuration(model)
    feet0 = foot_positions(model, q0)
    h0 = q0[2]
    t_to = n_stance * p["dt"]
    t_td = (n_stance + n_flight) * p["dt"]
    D = p["distance"]
    g = -model.gravity[2]

    def time_of(i):
        # impulse stages take no time
        return p["dt"] * (i if i <= n_stance + n_flight else i - 1)

    def base(i, q):
        t = time_of(i)
        s = np.clip((t - t_to) / (t_td - t_to), 0.0, 1.0)
        q[0] = D * s
        if t_to < t < t_td:
            q[2] = h0 + 0.5 * g * (t - t_to) * (t_td - t)
        return q

    def feet(i):
        t = time_of(i)
        q = base(i, q0.copy())
        if t_to < t < t_td:
            return feet0 + np.array([q[0], 0.0, q[2] - h0])
        shift = 0.0 if t <= t_to else D
        return feet0 + np.array([shift, 0.0, 0.0])

    return _build_from_plan(model, p, phases, base, feet, "jump", q0)


def _quadruped_trot(model, p):
    n_init, n_swing, n_final = 8, 10, 5
    A = (True, False, False, True)   # LF, RH stance -> RF, LH swing first
    B = (False, True, True, False)
    all4 = (True,) * 4
    phases = [("contact", all4, n_init)]
    swing_sets = []
    for r in range(4):
        stance = A if r % 2 == 0 else B
        phases.append(("contact", stance, n_swing))
        touchdown = tuple(not s for s in stance)
        phases.append(("impulse", touchdown, 1))
        swing_sets.append(touchdown)
    phases.append(("contact", all4, n_final))
    q0 = quadruped_standing_configuration(model)
    feet0 = foot_positions(model, q0)
    dt = p["dt"]
    D = p["distance"]
    t_start = n_init * dt
    t_end = (n_init + 4 * n_swing) * dt

    # node index -> time (impulse stages take no time)
    times, t = [], 0.0
    for kind, _, length in phases:
        for _ in range(length):
            times.append(t)
            if kind != "impulse":
                t += dt
    times.append(t)

    def base_x(tt):
        return D * np.clip((tt - t_start) / (t_end - t_start), 0.0, 1.0)

    def base(i, q):
        q[0] = base_x(times[i])
        return q

    # foot x follows piecewise: fixed during stance, moves during swing to the
    # touchdown target under the hip
    swing_windows = []
    for r in range(4):
        t0 = t_start + r * n_swing * dt
        swing_windows.append((t0, t0 + n_swing * dt, swing_sets[r]))

    def foot_x(k, tt):
        x = 0.0
        for t0, t1, legs in swing_windows:
            if not legs[k]:
                continue
            target = min(base_x(t1) + 0.5 * D / 4, D) if t1 < t_end else D
            if tt >= t1:
                x = target
            elif tt > t0:
                s = (tt - t0) / (t1 - t0)
                x = x + (target - x) * s
        return x

    def feet(i):
        tt = times[i]
        out = feet0.copy()
        for k in range(4):
            out[k, 0] += foot_x(k, tt)
            for t0, t1, legs in swing_windows:
                if legs[k] and t0 < tt < t1:
                    s = (tt - t0) / (t1 - t0)
                    out[k, 2] += 4.0 * p["step_height"] * s * (1.0 - s)
        return out

    return _build_from_plan(model, p, phases, base, feet, "trot", q0)


def _monoped_hop(model, p):
    n_stance, n_flight, n_land = 10, 8, 12
    phases = [("contact", (True,), n_stance), ("contact", (False,), n_flight), ("impulse", (True,), 1),
              ("contact", (True,), n_land)]
    q0 = monoped_standing_configuration(model)
    feet0 = foot_positions(model, q0)
    h0 = q0[model.joint_q_index("z")]
    ix, iz = model.joint_q_index("x"), model.joint_q_index("z")
    dt = p["dt"]
    t_to, t_td = n_stance * dt, (n_stance + n_flight) * dt
    g = -model.gravity[2]
    D = p["distance"]

    def time_of(i):
        return dt * (i if i <= n_stance + n_flight else i - 1)

    def base(i, q):
        t = time_of(i)
        q[ix] = D * np.clip((t - t_to) / (t_td - t_to), 0.0, 1.0)
        if t_to < t < t_td:
            q[iz] = h0 + 0.5 * g * (t - t_to) * (t_td - t)
        return q

    def feet(i):
        q = base(i, q0.copy())
        return feet0 + np.array([q[ix], 0.0, q[iz] - h0])

    return _build_from_plan(model, p, phases, base, feet, "hop", q0)


def _monoped_stand(model, p, N=20):
    phases = [("contact", (True,), N)]
    q0 = monoped_standing_configuration(model)
    feet0 = foot_positions(model, q0)
    return _build_from_plan(model, p, phases, lambda i, q: q, lambda i: feet0, "stand", q0)


def _pendulum_swingup(model, p, N=40):
    q_goal = np.array([np.pi])
    qs = np.array([q_goal * min(1.0, i / N) for i in range(N + 1)])
    wq = np.full(model.n, p["w_joint"])
    costs = [
        StageCost(q_ref=q_goal, w_q=wq, v_ref=np.zeros(1), w_v=np.full(1, p["w_v"]),
                  w_a=np.full(1, p["w_a"]) if p["w_a"] > 0 else None, w_u=np.full(1, p["w_u"]))
        for _ in range(N)
    ]
    term = TerminalCost(q_ref=q_goal, w_q=p["w_terminal"] * wq, v_ref=np.zeros(1), w_v=p["w_terminal"] * np.ones(1))
    schedule = ContactSchedule([ContactStatus.none(model)] * N)
    tl = p["torque_limit"]
    return OcpDefinition(
        model=model, N=N, dt=p["dt"], schedule=schedule, stage_costs=costs, terminal_cost=term,
        torque_limit=tl if tl > 0 else None, name="swingup",
        reference_q=np.zeros((N + 1, 1)), reference_v=np.zeros((N + 1, 1)),
    )


def build_gait(gait: str, model: RobotModel | None = None, **params) -> OcpDefinition:
    """Construct one of the shipped scenarios.

    ``trot`` and ``jump`` use the builtin quadruped, ``hop`` and ``stand`` the
    planar monoped and ``swingup`` the pendulum. Unknown parameters raise.
    """
    if gait not in GAITS:
        raise ValueError(f"unknown gait '{gait}' (expected one of {', '.join(GAITS)})")
    p = dict(_COMMON_DEFAULTS)
    p.update(_DEFAULTS[gait])
    if gait == "swingup":
        p.update(torque_limit=3.0, mu=0.0)
    N_req = params.pop("N", None)
    for k in params:
        if k not in p:
            raise ValueError(f"unknown gait parameter '{k}'")
    p.update({k: float(v) for k, v in params.items()})
    if model is None:
        model = {"trot": builtin_quadruped, "jump": builtin_quadruped, "hop": builtin_monoped,
                 "stand": builtin_monoped, "swingup": builtin_pendulum}[gait]()
    if gait == "jump":
        defn = _quadruped_jump(model, p)
    elif gait == "trot":
        defn = _quadruped_trot(model, p)
    elif gait == "hop":
        defn = _monoped_hop(model, p)
    elif gait == "stand":
        defn = _monoped_stand(model, p, int(N_req) if N_req else 20)
    else:
        defn = _pendulum_swingup(model, p, int(N_req) if N_req else 40)
    if N_req is not None and int(N_req) != defn.N:
        raise ValueError(f"gait '{gait}' has N={defn.N}, scenario requests N={int(N_req)}")
    return defn


# -- scenario files ---------------------------------------------------------------------

_SOLVER_KEYS = {"eps": float, "mode": str, "max_iters": int, "tol": float}
_GAIT_KEYS = {"N", "dt", "mu", "alpha", "beta", "torque_limit", "contact_penalty", "distance", "step_height",
              "w_base_pos", "w_base_rot", "w_joint", "w_v", "w_a", "w_f", "w_u", "w_foot", "w_com", "w_terminal"}


@dataclass
class Scenario:
    name: str
    gait: str
    definition: OcpDefinition
    eps: float = 1e-1
    mode: str = "both"
    max_iters: int = 100
    tol: float = 1e-8
    params: dict = field(default_factory=dict)

    @property
    def x0(self):
        d = self.definition
        return d.reference_q[0].copy(), d.reference_v[0].copy()

    def with_params(self, **params) -> "Scenario":
        """Rebuild the definition with overridden gait parameters."""
        p = dict(self.params)
        p.update(params)
        return replace(self, definition=build_gait(self.gait, self.definition.model, **p), params=p)


def parse_scenario(text: str, base_dir: Path | None = None) -> Scenario:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key '{key}'")
        if key not in _GAIT_KEYS and key not in _SOLVER_KEYS and key not in ("name", "gait", "model"):
            raise ValueError(f"line {lineno}: unknown key '{key}'")
        if key in _GAIT_KEYS:
            try:
                value = float(value)
            except ValueError:
                raise ValueError(f"line {lineno}: '{key}' expects a number") from None
        elif key in _SOLVER_KEYS:
            try:
                value = _SOLVER_KEYS[key](value)
            except ValueError:
                raise ValueError(f"line {lineno}: '{key}' has an invalid value") from None
        values[key] = value
    if "gait" not in values:
        raise ValueError("scenario has no 'gait' key")
    gait = values.pop("gait")
    name = values.pop("name", gait)
    model = None
    if "model" in values:
        path = Path(values.pop("model"))
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        model = load_model_file(path)
    solver = {k: values.pop(k) for k in list(values) if k in _SOLVER_KEYS}
    if "mode" in solver and solver["mode"] not in ("lifted", "nonlifted", "both"):
        raise ValueError(f"invalid mode '{solver['mode']}'")
    defn = build_gait(gait, model, **values)
    return Scenario(name=name, gait=gait, definition=defn, params=values, **solver)


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), path.parent)


def scenario_path(name: str) -> Path:
    """Location of a shipped scenario file such as ``trot.cfg``."""
    return Path(__file__).parent / "scenarios" / name


def gravity_compensation(model: RobotModel, q, status: ContactStatus) -> tuple[np.ndarray, np.ndarray]:
    """Torques and contact forces holding ``q`` at rest (least-norm forces).

    The passive rows of ``h(q, 0) = S^T u + J^T f`` are solved for ``f`` in
    the least-norm sense, then ``u`` takes the actuated rows.
    """
    from .dynamics import contact_kinematics

    h = inverse_dynamics(model, q, np.zeros(model.n), np.zeros(model.n))
    npas = model.n_passive
    _, J, _, _ = contact_kinematics(model, q, np.zeros(model.n), status)
    f = np.zeros(J.shape[0])
    if J.shape[0] and npas:
        f = np.linalg.lstsq(J[:, :npas].T, h[:npas], rcond=None)[0]
    u = (h - J.T @ f)[npas:]
    return u, f
