"""Newton-type direct multiple shooting with lifted or non-lifted contact dynamics.

One iteration linearizes and condenses every stage (independently, optionally
on a thread pool), solves the condensed LQR subproblem by Riccati recursion,
expands the eliminated steps, sizes the step by the fraction-to-boundary rule
and updates the iterate on the configuration manifold. There is no line
search.

In ``nonlifted`` mode the accelerations and contact forces (or impulse
velocity changes and impulses) are not decision variables: before each
linearization they are recomputed from the contact (or impulse) dynamics, and
the same condensing code then reduces to the chain rule through that solve.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SingularContactError, contact_dynamics, impulse_dynamics
from .interiorpoint import TAU, empty_block, initialize_block, max_step
from .liftedkkt import (
    LiftedStageIterate,
    TerminalIterate,
    condense,
    expand,
    incoming_jacobian,
    linearize_stage,
)
from .lqr import LqrSubproblem, RiccatiError, solve_riccati
from .ocpdef import OcpDefinition, friction_cone_matrix, gravity_compensation, terminal_cost

MODES = ("lifted", "nonlifted")
TRACE_COLUMNS = ("iteration", "kkt_norm", "alpha_primal", "alpha_dual", "t_linearize_ms", "t_riccati_ms", "t_expand_ms")


@dataclass
class SolverOptions:
    mode: str = "lifted"
    max_iters: int = 100
    kkt_tolerance: float = 1e-8
    eps: float = 1e-1
    tau: float = TAU
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.kkt_tolerance > 0 or not self.eps > 0:
            raise ValueError("tolerance and barrier parameter must be positive")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if self.threads < 1 or self.max_iters < 0:
            raise ValueError("threads must be >= 1 and max_iters >= 0")


@dataclass
class ConvergenceTrace:
    """One row per evaluated iterate; the last row has zero step sizes if converged."""

    kkt_norm: list = field(default_factory=list)
    alpha_primal: list = field(default_factory=list)
    alpha_dual: list = field(default_factory=list)
    t_linearize_ms: list = field(default_factory=list)
    t_riccati_ms: list = field(default_factory=list)
    t_expand_ms: list = field(default_factory=list)

    def append(self, kkt, ap, ad, t_lin, t_ric, t_exp):
        self.kkt_norm.append(float(kkt))
        self.alpha_primal.append(float(ap))
        self.alpha_dual.append(float(ad))
        self.t_linearize_ms.append(float(t_lin))
        self.t_riccati_ms.append(float(t_ric))
        self.t_expand_ms.append(float(t_exp))

    def __len__(self) -> int:
        return len(self.kkt_norm)

    @property
    def iterations(self) -> int:
        """Number of Newton steps taken."""
        return max(len(self) - 1, 0)

    def per_iteration_ms(self) -> np.ndarray:
        """Wall time of each completed Newton step (all three phases)."""
        k = self.iterations
        return (np.array(self.t_linearize_ms[:k]) + np.array(self.t_riccati_ms[:k])
                + np.array(self.t_expand_ms[:k]))

    def rows(self):
        for k in range(len(self)):
            yield (k, self.kkt_norm[k], self.alpha_primal[k], self.alpha_dual[k],
                   self.t_linearize_ms[k], self.t_riccati_ms[k], self.t_expand_ms[k])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for row in self.rows():
                w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])


@dataclass
class Iterates:
    stages: list
    terminal: TerminalIterate

    def copy(self) -> "Iterates":
        return Iterates([s.copy() for s in self.stages], self.terminal.copy())

    def states(self):
        """``(q, v)`` arrays over the N + 1 nodes."""
        qs = np.array([s.q for s in self.stages] + [self.terminal.q])
        vs = np.array([s.v for s in self.stages] + [self.terminal.v])
        return qs, vs


@dataclass
class SolveResult:
    iterates: Iterates
    trace: ConvergenceTrace
    status: str
    message: str = ""
    history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def iterations(self) -> int:
        return self.trace.iterations


class SolverError(RuntimeError):
    def __init__(self, message: str, stage: int | None = None, iteration: int | None = None):
        self.stage = stage
        self.iteration = iteration
        super().__init__(message)


# -- iterate construction ----------------------------------------------------------------

def constraint_rows(defn: OcpDefinition, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Affine inequality rows ``Jg y + g0 >= 0`` of stage ``i`` on ``y = (a, -f, u)``."""
    model = defn.model
    n = model.n
    status = defn.status(i)
    impulse = defn.kind(i) == "impulse"
    nf = model.contact_dim(status)
    nu = 0 if impulse else model.n_a
    ny = n + nf + nu
    rows, offs = [], []
    if not impulse and defn.friction is not None:
        off = n
        for k in status.active_indices():
            axes = model.contact_frames[k].axes
            C = friction_cone_matrix(defn.friction.mu, axes)
            blk = np.zeros((C.shape[0], ny))
            blk[:, off: off + len(axes)] = -C  # y holds -f
            rows.append(blk)
            offs.append(np.zeros(C.shape[0]))
            off += len(axes)
    if nu and defn.torque_limit is not None:
        blk = np.zeros((2 * nu, ny))
        blk[:nu, n + nf:] = -np.eye(nu)
        blk[nu:, n + nf:] = np.eye(nu)
        rows.append(blk)
        offs.append(np.full(2 * nu, defn.torque_limit))
    if not rows:
        return np.zeros((0, ny)), np.zeros(0)
    return np.vstack(rows), np.concatenate(offs)


def _make_stage(defn, i, q, v, a, f, u, eps) -> LiftedStageIterate:
    model = defn.model
    n = model.n
    impulse = defn.kind(i) == "impulse"
    npas = 0 if impulse else model.n_passive
    st = LiftedStageIterate(
        kind=defn.kind(i), q=np.array(q, dtype=float), v=np.array(v, dtype=float),
        a=np.array(a, dtype=float), f=np.array(f, dtype=float), u=np.array(u, dtype=float),
        u0=np.zeros(npas), lmd=np.zeros(n), gmm=np.zeros(n), beta=np.zeros(n),
        mu=np.zeros(len(f)), nu=np.zeros(npas), ipm=empty_block(0, eps),
    )
    Jg, g0 = constraint_rows(defn, i)
    st.ipm = initialize_block(Jg, g0, st.y(), eps) if g0.size else empty_block(Jg.shape[1], eps)
    return st


def initialize_iterates(defn: OcpDefinition, x0, policy: str = "reference", eps: float = 1e-1) -> Iterates:
    """Initial primal-dual iterate.

    ``reference``: states from the definition's reference trajectory (the
    first node at ``x0``), torques from gravity compensation, accelerations
    and forces from the contact (or impulse) dynamics. ``hold``: the same
    but every node at ``x0``. ``zero``: every node at ``x0`` and all other
    primal variables zero. All multipliers start at zero.
    """
    model = defn.model
    q0, v0 = (np.asarray(x, dtype=float) for x in x0)
    N = defn.N
    if policy == "reference":
        if defn.reference_q is None:
            raise ValueError("definition has no reference trajectory")
        qs = np.array(defn.reference_q, dtype=float)
        vs = np.array(defn.reference_v, dtype=float)
        qs[0], vs[0] = q0, v0
    elif policy in ("hold", "zero"):
        qs = np.tile(q0, (N + 1, 1))
        vs = np.tile(v0 if policy == "hold" else np.zeros(model.n), (N + 1, 1))
        vs[0] = v0
    else:
        raise ValueError(f"unknown initialization policy '{policy}'")
    stages = []
    for i in range(N):
        status = defn.status(i)
        nf = model.contact_dim(status)
        if defn.kind(i) == "impulse":
            if policy == "zero":
                a, f = np.zeros(model.n), np.zeros(nf)
            else:
                a, f = impulse_dynamics(model, qs[i], vs[i], status)
            u = np.zeros(0)
        else:
            if policy == "zero":
                u, a, f = np.zeros(model.n_a), np.zeros(model.n), np.zeros(nf)
            else:
                u, _ = gravity_compensation(model, qs[i], status)
                if defn.torque_limit is not None:
                    u = np.clip(u, -0.9 * defn.torque_limit, 0.9 * defn.torque_limit)
                a, f = contact_dynamics(model, qs[i], vs[i], u, status, defn.baumgarte)
        stages.append(_make_stage(defn, i, qs[i], vs[i], a, f, u, eps))
    term = TerminalIterate(qs[N].copy(), vs[N].copy(), np.zeros(model.n), np.zeros(model.n))
    return Iterates(stages, term)


def refresh_nonlifted(defn: OcpDefinition, i: int, st: LiftedStageIterate):
    """Set ``(a, f)`` (or ``(dv, Lambda)``) from the forward contact/impulse dynamics."""
    model = defn.model
    status = defn.status(i)
    if st.kind == "impulse":
        st.a, st.f = impulse_dynamics(model, st.q, st.v, status)
    else:
        st.a, st.f = contact_dynamics(model, st.q, st.v, st.u, status, defn.baumgarte)


def nonlifted_linearize(defn: OcpDefinition, i: int, iterates: Iterates, x0):
    """Stage LQR data of the non-lifted formulation (refreshes ``(a, f)`` in place)."""
    st = iterates.stages[i]
    refresh_nonlifted(defn, i, st)
    q_prev = x0[0] if i == 0 else iterates.stages[i - 1].q
    nxt = iterates.stages[i + 1] if i + 1 < defn.N else iterates.terminal
    return condense(linearize_stage(defn, i, st, q_prev, nxt, lifted=False))


def update_iterates(defn: OcpDefinition, iterates: Iterates, steps, alpha_p: float, alpha_d: float,
                   terminal_step=None, lifted: bool = True):
    """Apply a primal-dual step in place: configurations on the manifold, the rest linearly."""
    space = defn.model.space
    n = defn.model.n
    for i, (st, step) in enumerate(zip(iterates.stages, steps)):
        st.q = space.integrate(st.q, alpha_p * step.dx[:n])
        st.v = st.v + alpha_p * step.dx[n:]
        da, df = step.split_w(n)
        st.a = st.a + alpha_p * da
        st.f = st.f + alpha_p * df
        st.u = st.u + alpha_p * step.du
        st.lmd = st.lmd + alpha_p * step.dpi[:n]
        st.gmm = st.gmm + alpha_p * step.dpi[n:]
        if lifted:
            c = defn.stage_dt(i) or 1.0
            st.beta = st.beta + alpha_p * step.dxi[:n] / c
            st.mu = st.mu + alpha_p * step.dxi[n:] / c
            st.nu = st.nu + alpha_p * step.dnu
        st.ipm.s = st.ipm.s + alpha_p * step.ds
        st.ipm.z = st.ipm.z + alpha_d * step.dz
    if terminal_step is not None:
        dx, dpi = terminal_step
        t = iterates.terminal
        t.q = space.integrate(t.q, alpha_p * dx[:n])
        t.v = t.v + alpha_p * dx[n:]
        t.lmd = t.lmd + alpha_p * dpi[:n]
        t.gmm = t.gmm + alpha_p * dpi[n:]


# -- main loop --------------------------------------------------------------------------------

def terminal_data(defn, iterates: Iterates):
    """Terminal Hessian and gradient ``(QN, LN)`` including the incoming costate term."""
    t = iterates.terminal
    n = defn.model.n
    _, lq, lv, Hqq, Hvv = terminal_cost(defn, t.q, t.v)
    E_N = incoming_jacobian(defn.model.space, iterates.stages[-1].q, t.q)
    QN = np.zeros((2 * n, 2 * n))
    QN[:n, :n] = Hqq
    QN[n:, n:] = Hvv
    LN = np.concatenate([lq, lv]) + E_N.T @ np.concatenate([t.lmd, t.gmm])
    return QN, LN


def initial_data(defn, iterates: Iterates, x0):
    """Jacobian and residual ``(E0, F0)`` of the initial-state rows."""
    space = defn.model.space
    st = iterates.stages[0]
    F0 = np.concatenate([space.difference(x0[0], st.q), x0[1] - st.v])
    E0 = incoming_jacobian(space, x0[0], st.q)
    return E0, F0


def kkt_norm(defn: OcpDefinition, iterates: Iterates, x0, lifted: bool = True) -> float:
    """l2 norm of all KKT residual blocks at ``iterates`` (no side effects)."""
    its = iterates.copy()
    datas = [linearize_node(defn, its, i, x0, lifted) for i in range(defn.N)]
    return _norm(defn, its, x0, datas)


def linearize_node(defn, iterates, i, x0, lifted):
    """Linearize and condense stage ``i`` (refreshing ``(a, f)`` first when not lifted)."""
    st = iterates.stages[i]
    if not lifted:
        refresh_nonlifted(defn, i, st)
    q_prev = x0[0] if i == 0 else iterates.stages[i - 1].q
    nxt = iterates.stages[i + 1] if i + 1 < defn.N else iterates.terminal
    return condense(linearize_stage(defn, i, st, q_prev, nxt, lifted))


def _norm(defn, iterates, x0, datas, terminal=None):
    _, F0 = initial_data(defn, iterates, x0)
    _, LN = terminal if terminal is not None else terminal_data(defn, iterates)
    total = F0 @ F0 + LN @ LN + sum(d.residual.squared_norm() for d in datas)
    return float(np.sqrt(total))


def solve(defn: OcpDefinition, x0, options: SolverOptions | None = None, initial_guess: Iterates | None = None,
          keep_history: bool = False) -> SolveResult:
    """Run the Newton-type iteration from ``initial_guess`` (default: reference policy)."""
    options = options or SolverOptions()
    lifted = options.mode == "lifted"
    x0 = (np.asarray(x0[0], dtype=float), np.asarray(x0[1], dtype=float))
    model = defn.model
    iterates = (initial_guess.copy() if initial_guess is not None
                else initialize_iterates(defn, x0, eps=options.eps))
    for st in iterates.stages:
        st.ipm.eps = options.eps
    trace = ConvergenceTrace()
    history = []
    N = defn.N
    pool = ThreadPoolExecutor(options.threads) if options.threads > 1 else None
    mapper = pool.map if pool is not None else map
    status, message = "max_iters", ""
    try:
        for k in range(options.max_iters + 1):
            if keep_history:
                history.append(iterates.copy())
            t0 = time.perf_counter()
            try:
                datas = list(mapper(lambda i: linearize_node(defn, iterates, i, x0, lifted), range(N)))
            except SingularContactError as exc:
                raise SolverError(f"iteration {k}: {exc}", exc.stage, k) from None
            QN, LN = terminal_data(defn, iterates)
            E0, F0 = initial_data(defn, iterates, x0)
            norm = _norm(defn, iterates, x0, datas, (QN, LN))
            t1 = time.perf_counter()
            if not np.isfinite(norm):
                raise SolverError(f"iteration {k}: KKT residual is not finite", None, k)
            if norm < options.kkt_tolerance:
                trace.append(norm, 0.0, 0.0, 1e3 * (t1 - t0), 0.0, 0.0)
                status = "converged"
                break
            if k == options.max_iters:
                trace.append(norm, 0.0, 0.0, 1e3 * (t1 - t0), 0.0, 0.0)
                break
            sub = LqrSubproblem([d.lqr for d in datas], E0, F0, QN, LN)
            try:
                sol = solve_riccati(sub)
            except RiccatiError as exc:
                raise SolverError(f"iteration {k}: {exc}", exc.stage, k) from None
            t2 = time.perf_counter()
            steps = list(mapper(
                lambda i: expand(datas[i], sol.dx[i], sol.du[i], sol.dpi[i], sol.dpi[i + 1]), range(N)))
            alpha_p, alpha_d = 1.0, 1.0
            for st, step in zip(iterates.stages, steps):
                if st.ipm.size:
                    alpha_p = min(alpha_p, max_step(st.ipm.s, step.ds, options.tau))
                    alpha_d = min(alpha_d, max_step(st.ipm.z, step.dz, options.tau))
            update_iterates(defn, iterates, steps, alpha_p, alpha_d, (sol.dx[N], sol.dpi[N]), lifted)
            t3 = time.perf_counter()
            trace.append(norm, alpha_p, alpha_d, 1e3 * (t1 - t0), 1e3 * (t2 - t1), 1e3 * (t3 - t2))
    except SolverError as exc:
        status, message = "error", str(exc)
    finally:
        if pool is not None:
            pool.shutdown()
    if not lifted and status != "error":
        for i, st in enumerate(iterates.stages):
            refresh_nonlifted(defn, i, st)
    return SolveResult(iterates, trace, status, message, history)


def default_threads() -> int:
    env = os.environ.get("LIFTEDOCP_THREADS")
    return max(1, int(env)) if env else 1
