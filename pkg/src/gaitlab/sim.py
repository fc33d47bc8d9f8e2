"""Hybrid step-to-step walking simulator.

Each phase is integrated with exact closed-form transitions on a substep
grid; legs are exchanged at touchdown events. The controller runs in the
loop: an open-loop run applies nominal inputs only, the event controller
freezes its correction at each touchdown, and the time-projection
controller re-solves its correction at every substep. Pushes are constant
forces over a percentage window of one phase and enter through the push
transition block, so doubling a force exactly doubles the response.
"""

from dataclasses import dataclass

import numpy as np

from .control import DlqrDesign, design_dlqr, project_input
from .errors import ProjectionSingularError
from .gait import PeriodicGait, scale_gait, solve_periodic_gait
from .lti import transition
from .models import BodyParams, STANCE, SWING, build_model, error_system

CONTROLLERS = ("open_loop", "dlqr", "projection")

_LAT_FLIP_Q = np.diag([1.0, -1.0] * 6)      # mirror a full state laterally
_LAT_FLIP_U = np.diag([1.0, -1.0, 1.0, -1.0])


@dataclass(frozen=True)
class PushEvent:
    """Constant force over a sub-window of one phase."""

    phase: int
    start_pct: float
    end_pct: float
    force: tuple[float, float]      # (sagittal, lateral) N

    def __post_init__(self):
        if not 0.0 <= self.start_pct < self.end_pct <= 1.0:
            raise ValueError("push window must satisfy 0 <= start < end <= 1")
        if self.phase < 0:
            raise ValueError("push phase must be non-negative")


@dataclass(frozen=True)
class Scenario:
    params: BodyParams
    f: float
    v: float
    controller: str = "projection"
    model_kind: str = "3lp"
    substeps: int = 50
    n_steps: int = 10
    pushes: tuple[PushEvent, ...] = ()
    speed_schedule: tuple[tuple[int, float], ...] = ()
    q_scale: float = 1.0
    r_scale: float = 1.0

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        steps = [s for s, _ in self.speed_schedule]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("speed schedule step indices must be strictly increasing")

    def cost_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Q = q_scale·I₈ and R = r_scale·(mg)⁻²·I₄."""
        mg = self.params.mass * self.params.gravity
        return self.q_scale * np.eye(8), self.r_scale * mg ** -2 * np.eye(4)


@dataclass
class EventRecord:
    step: int
    E: np.ndarray               # (8,) reduced error at the touchdown
    dU: np.ndarray              # (4,) correction active in the next phase
    footstep: np.ndarray        # (2,) absolute stance-foot position
    avg_speed: float            # feet separation / stride time


@dataclass
class TrajectoryLog:
    """Substep samples plus one record per touchdown event."""

    t: np.ndarray
    phase: np.ndarray
    q: np.ndarray               # (n, 12)
    qbar: np.ndarray            # (n, 12)
    du: np.ndarray              # (n, 4) corrective input parameters
    u: np.ndarray               # (n, 2) applied torque at the sample
    err_norm: np.ndarray
    push_active: np.ndarray
    events: list[EventRecord]
    fall: bool = False
    fall_step: int = -1
    projection_holds: int = 0   # substeps where a singular solve held the input

    def du_norms(self) -> np.ndarray:
        return np.linalg.norm(self.du, axis=1)


def _rebase_nominal(gait: PeriodicGait, d: float, anchor: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Express a canonical gait at the current support parity and location.

    Mirrors the event state laterally when the support side disagrees with
    the canonical one, then translates it so the stance foot sits at
    `anchor`. Translations are invisible to the reduced error.
    """
    qb, ub = gait.qbar, gait.ubar
    if d != gait.dbar:
        qb = _LAT_FLIP_Q @ qb
        ub = _LAT_FLIP_U @ ub
    offset = np.asarray(anchor, dtype=float) - qb[list(STANCE)]
    shift = np.zeros(12)
    shift[0:6] = np.tile(offset, 3)
    return qb + shift, ub


def run_walk(scn: Scenario, design: DlqrDesign | None = None) -> TrajectoryLog:
    """Simulate a walking scenario and log everything.

    The nominal reference is propagated alongside the actual state with the
    same closed-form transitions; speed-schedule entries replace it at the
    corresponding touchdown event only. A reduced-error norm above
    1e3·leg_length truncates the run with the fall flag set (expected for
    open-loop push scenarios, not an error).
    """
    model = build_model(scn.model_kind, scn.params)
    gait = solve_periodic_gait(model, scn.f, scn.v)
    err = error_system(model, gait.T)
    if design is None:
        q_cost, r_cost = scn.cost_matrices()
        design = design_dlqr(err, q_cost, r_cost)
    ops = err.ops
    T = gait.T
    n_sub = scn.substeps
    dt = T / n_sub
    ts_sub = transition(model, dt)
    proj_maps = None
    if scn.controller == "projection":
        proj_maps = [err.maps(j * dt) for j in range(n_sub)]
    schedule = dict(scn.speed_schedule)
    fall_limit = 1e3 * scn.params.leg_length

    q = gait.qbar.copy()
    qbar = gait.qbar.copy()
    ubar = gait.ubar.copy()
    d = gait.dbar

    n_rows = scn.n_steps * n_sub
    log = TrajectoryLog(
        t=np.zeros(n_rows), phase=np.zeros(n_rows, dtype=int),
        q=np.zeros((n_rows, 12)), qbar=np.zeros((n_rows, 12)),
        du=np.zeros((n_rows, 4)), u=np.zeros((n_rows, 2)),
        err_norm=np.zeros(n_rows), push_active=np.zeros(n_rows, dtype=int),
        events=[],
    )
    row = 0
    last_du = np.zeros(4)

    for k in range(scn.n_steps):
        if k in schedule:
            gait = scale_gait(gait, schedule[k])
            qbar, ubar = _rebase_nominal(gait, d, qbar[list(STANCE)])
        e8_event = ops.M @ (q - qbar)
        du_event = np.zeros(4)
        if scn.controller == "dlqr":
            du_event = -design.K_full @ e8_event
        pushes_k = [p for p in scn.pushes if p.phase == k]

        for j in range(n_sub):
            tj = j * dt
            e8 = ops.M @ (q - qbar)
            if scn.controller == "open_loop":
                du = np.zeros(4)
            elif scn.controller == "dlqr":
                du = du_event
            else:
                try:
                    du = project_input(design, tj, e8, maps=proj_maps[j])
                except ProjectionSingularError:
                    du = last_du
                    log.projection_holds += 1
            last_du = du
            if scn.controller == "projection" and j == 0:
                du_event = du

            u_tot = ubar + du
            local = np.concatenate([u_tot[:2] + tj * u_tot[2:], u_tot[2:]])
            local_bar = np.concatenate([ubar[:2] + tj * ubar[2:], ubar[2:]])

            active = 0
            q_next = ts_sub.A @ q + ts_sub.B @ local + ts_sub.C * d
            qbar_next = ts_sub.A @ qbar + ts_sub.B @ local_bar + ts_sub.C * d
            for p in pushes_k:
                w1 = max(p.start_pct * T - tj, 0.0)
                w2 = min(p.end_pct * T - tj, dt)
                if w2 > w1 + 1e-15:
                    active = 1
                    kick = transition(model, w2 - w1).W @ np.asarray(p.force)
                    q_next = q_next + transition(model, dt - w2).A @ kick

            log.t[row] = k * T + tj
            log.phase[row] = k
            log.q[row] = q
            log.qbar[row] = qbar
            log.du[row] = du
            log.u[row] = u_tot[:2] + tj * u_tot[2:]
            log.err_norm[row] = np.linalg.norm(e8)
            log.push_active[row] = active
            row += 1
            q, qbar = q_next, qbar_next

        e_td = ops.OMS @ (q - qbar)
        avg_speed = (q[SWING[0]] - q[STANCE[0]]) / T
        q = ops.S @ q
        qbar = ops.S @ qbar
        d = -d
        ubar = _LAT_FLIP_U @ ubar
        log.events.append(EventRecord(
            step=k, E=e_td, dU=du_event, footstep=q[list(STANCE)].copy(),
            avg_speed=float(avg_speed),
        ))
        if np.linalg.norm(e_td) > fall_limit:
            log.fall = True
            log.fall_step = k
            break

    used = row
    for name in ("t", "phase", "q", "qbar", "du", "u", "err_norm", "push_active"):
        setattr(log, name, getattr(log, name)[:used])
    return log


def speed_track(scn: Scenario) -> tuple[TrajectoryLog, np.ndarray, np.ndarray]:
    """Run a speed-tracking scenario.

    Returns the log, the per-step average speeds (feet separation over the
    stride time at each touchdown) and the per-step RMS of the corrective
    input parameters.
    """
    log = run_walk(scn)
    speeds = np.array([ev.avg_speed for ev in log.events])
    rms = np.zeros(len(log.events))
    du_norm = log.du_norms()
    for i, ev in enumerate(log.events):
        mask = log.phase == ev.step
        rms[i] = np.sqrt(np.mean(du_norm[mask] ** 2)) if np.any(mask) else 0.0
    return log, speeds, rms
