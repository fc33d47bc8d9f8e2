"""Stability, push-recovery and viability analysis.

* Poincaré eigenvalues of the sagittal step-to-step map (three effective
  coordinates once both feet rest at events).
* Push sweeps over (start, end) windows, recording touchdown error norms
  over the following steps for each controller.
* Viable regions by ray-casting: closed-loop regions come from the minimum
  positive constraint ratio along each ray (every constrained quantity is
  linear in the initial error), the maximal capturable set from a linear
  program over per-subphase input profiles with a zero terminal error.
* Scalar-system checks: the Lyapunov scan over admissible event gains and
  the three-controller disturbance-rejection demo.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .control import DlqrDesign, design_dlqr, project_input, scalar_design, \
    scalar_gain_bounds, scalar_projection_feedback
from .errors import NumericalError
from .gait import solve_periodic_gait
from .lti import input_shift, transition
from .models import BodyParams, build_model, error_system
from .sim import PushEvent, Scenario, run_walk

# sagittal components of the reduced error (s1, s2, their rates)
_SAG8 = (0, 2, 4, 6)
# reduced constrained event space: (s1x, s1y, s2x, s2y, v_x, v_y) with the
# common foot-relative rate v duplicated into both rate slots
_EMBED6 = np.zeros((8, 6))
_EMBED6[0, 0] = _EMBED6[1, 1] = _EMBED6[2, 2] = _EMBED6[3, 3] = 1.0
_EMBED6[4, 4] = _EMBED6[5, 5] = 1.0
_EMBED6[6, 4] = _EMBED6[7, 5] = 1.0

#: 2-D scan planes: sagittal position offsets e1 = s1x, e2 = s2x and the
#: sagittal rate offset e3 = v_x, as indices into the 6-vector above
PLANES = {"e1/e2": (0, 2), "e1/e3": (0, 4), "e2/e3": (2, 4)}


def _projection_event_gain(design: DlqrDesign) -> np.ndarray:
    """Event-time feedback matrix realized by the projection solve."""
    n = design.err.Ahat.shape[0]
    cols = [-project_input(design, 0.0, e) for e in np.eye(n)]
    return np.column_stack(cols)


def poincare_eigenvalues(
    params: BodyParams,
    controller: str,
    f: float,
    model_kind: str = "3lp",
    q_scale: float = 1.0,
    r_scale: float = 1.0,
) -> np.ndarray:
    """Sagittal step-to-step eigenvalue magnitudes, sorted descending.

    At events both feet are at rest, so the sagittal error reduces to
    (s1, s2, common rate); the one-step map is compressed onto that
    three-dimensional section. Independent of the gait speed: only the
    model and the step frequency enter.
    """
    if f <= 0:
        raise ValueError("frequency must be positive")
    model = build_model(model_kind, params)
    err = error_system(model, 1.0 / f)
    if controller == "open_loop":
        map8 = err.Ahat
    else:
        mg = params.mass * params.gravity
        design = design_dlqr(err, q_scale * np.eye(8), r_scale * mg ** -2 * np.eye(4))
        if controller == "dlqr":
            map8 = design.closed_loop()
        elif controller == "projection":
            map8 = err.Ahat - err.Bhat @ _projection_event_gain(design)
        else:
            raise ValueError(f"unknown controller {controller!r}")
    sag = map8[np.ix_(_SAG8, _SAG8)]
    t_in = np.array([[1.0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 1]])
    t_out = np.array([[1.0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0.5, 0.5]])
    eig = np.abs(np.linalg.eigvals(t_out @ sag @ t_in))
    return np.sort(eig)[::-1]


def push_sweep(
    params: BodyParams,
    f: float,
    v: float,
    force: tuple[float, float],
    starts: np.ndarray,
    ends: np.ndarray,
    controllers: tuple[str, ...] = ("open_loop", "dlqr", "projection"),
    n_events: int = 3,
    substeps: int = 50,
    model_kind: str = "3lp",
) -> dict[str, np.ndarray]:
    """Touchdown error-norm surfaces over a (start, end) push-window grid.

    Cell (i, j) holds ‖E‖ at the first `n_events` touchdowns after a push
    over [starts[i], ends[j]] of phase 0. Zero-duration cells are zero;
    cells with start > end are NaN.
    """
    out = {}
    for ctrl in controllers:
        surf = np.full((len(starts), len(ends), n_events), np.nan)
        for i, s in enumerate(starts):
            for j, e in enumerate(ends):
                if e < s - 1e-12:
                    continue
                if e <= s + 1e-12:
                    surf[i, j] = 0.0
                    continue
                scn = Scenario(
                    params=params, f=f, v=v, controller=ctrl,
                    model_kind=model_kind, substeps=substeps,
                    n_steps=n_events + 1,
                    pushes=(PushEvent(phase=0, start_pct=float(s),
                                      end_pct=float(e), force=force),),
                )
                log = run_walk(scn)
                norms = [np.linalg.norm(ev.E) for ev in log.events[:n_events]]
                surf[i, j, :len(norms)] = norms
        out[ctrl] = surf
    return out


@dataclass(frozen=True)
class ViableQuery:
    """Parameters of one viable-region computation."""

    params: BodyParams
    f: float
    v: float
    controller: str = "dlqr"            # dlqr | projection | maximal
    n_steps: int = 6
    subphases: int = 5
    torque_limit: float = 80.0          # N·m, symmetric box
    diamond: float = 1.7                # m, footstep diamond diameter
    rays: int = 100
    plane: str = "e2/e3"
    model_kind: str = "3lp"
    q_scale: float = 1.0
    r_scale: float = 1.0

    def __post_init__(self):
        if self.torque_limit <= 0 or self.diamond <= 0:
            raise ValueError("constraint bounds must be positive")
        if self.plane not in PLANES:
            raise ValueError(f"plane must be one of {sorted(PLANES)}")
        if self.controller not in ("dlqr", "projection", "maximal"):
            raise ValueError("controller must be dlqr, projection or maximal")


@dataclass(frozen=True)
class RegionSample:
    ray: np.ndarray             # unit direction in the 6-d event-error space
    angle: float                # position on the scan plane, radians
    alpha_max: float
    binding: str                # tag of the first active constraint


class _Workspace:
    """Per-(model, gait, design) tables shared across rays."""

    def __init__(self, query: ViableQuery):
        self.query = query
        self.model = build_model(query.model_kind, query.params)
        self.gait = solve_periodic_gait(self.model, query.f, query.v)
        self.err = error_system(self.model, self.gait.T)
        mg = query.params.mass * query.params.gravity
        self.design = design_dlqr(
            self.err, query.q_scale * np.eye(8),
            query.r_scale * mg ** -2 * np.eye(4),
        )
        ops = self.err.ops
        T = self.gait.T
        n_sub = query.subphases
        dt = T / n_sub
        self.dt = dt
        ts = transition(self.model, dt)
        self.A_sub = ops.M @ ts.A @ ops.Mhat        # within-phase reduced step
        self.B_sub = ops.M @ ts.B                   # local input parameters
        self.J_event = ops.OMS @ ops.Mhat           # pre-swap error to event error
        self.proj_maps = [self.err.maps(j * dt) for j in range(n_sub)]

        # nominal torque samples and footstep displacements over the horizon
        lat_u = np.diag([1.0, -1.0, 1.0, -1.0])
        ubar = self.gait.ubar.copy()
        self.u_nom = np.zeros((query.n_steps, n_sub + 1, 2))
        self.step_nom = np.zeros((query.n_steps, 2))
        stride_vec = np.array([
            self.gait.qbar[4] - self.gait.qbar[0],
            self.gait.qbar[5] - self.gait.qbar[1],
        ])
        lat_flip = np.array([1.0, -1.0])
        for k in range(query.n_steps):
            for j in range(n_sub + 1):
                t = j * dt
                self.u_nom[k, j] = ubar[:2] + t * ubar[2:]
            self.step_nom[k] = stride_vec
            stride_vec = lat_flip * stride_vec
            ubar = lat_u @ ubar


def _closed_loop_deltas(ws: _Workspace, e0: np.ndarray, controller: str):
    """Per-unit-α torque samples and footstep deviations along a rollout."""
    q = ws.query
    n_sub = q.subphases
    dt = ws.dt
    du_samples = np.zeros((q.n_steps, n_sub + 1, 2))
    step_dev = np.zeros((q.n_steps, 2))
    E = e0.copy()
    for k in range(q.n_steps):
        du_event = -ws.design.K_full @ E
        e = E.copy()
        du = du_event
        for j in range(n_sub):
            if controller == "projection":
                du = project_input(ws.design, j * dt, e, maps=ws.proj_maps[j])
            tj = j * dt
            du_samples[k, j] = du[:2] + tj * du[2:]
            du_samples[k, j + 1] = du[:2] + (tj + dt) * du[2:]
            e = ws.A_sub @ e + ws.B_sub @ (input_shift(tj) @ du)
        step_dev[k] = e[2:4] - e[0:2]           # deviation of x2 − x3 at landing
        E = ws.J_event @ e
    return du_samples, step_dev


_DIAMOND_SIGNS = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])


def _ratio_alpha(ws: _Workspace, du_samples, step_dev):
    """Minimum positive constraint ratio and its tag."""
    q = ws.query
    best = np.inf
    tag = "unbounded"
    tq = q.torque_limit
    for k in range(q.n_steps):
        for j in range(q.subphases + 1):
            for c in range(2):
                nom = ws.u_nom[k, j, c]
                dlt = du_samples[k, j, c]
                for sign in (1.0, -1.0):
                    # sign·(nom + α·dlt) <= tq
                    denom = sign * dlt
                    if denom > 1e-15:
                        a = (tq - sign * nom) / denom
                        if a < best:
                            best, tag = a, f"torque[step{k},sub{j},ch{c}]"
        landing = ws.step_nom[k]
        for srow in _DIAMOND_SIGNS:
            denom = float(srow @ step_dev[k])
            if denom > 1e-15:
                a = (q.diamond / 2.0 - float(srow @ landing)) / denom
                if a < best:
                    best, tag = a, f"diamond[step{k}]"
    return best, tag


def _maximal_alpha(ws: _Workspace, e0: np.ndarray):
    """Largest α with feasible per-subphase inputs and zero terminal error.

    Decision variables: α plus local (constant, ramp) input parameters per
    subphase and channel. The error chain is affine in all of them, so the
    torque boxes, footstep diamonds and the terminal equality make one LP.
    """
    q = ws.query
    n_sub = q.subphases
    dt = ws.dt
    n_w = q.n_steps * n_sub * 4
    nvar = 1 + n_w

    # accumulate affine coefficients of the reduced error at each subphase
    coeff = np.zeros((8, nvar))
    coeff[:, 0] = e0
    a_ub, b_ub = [], []
    tq = q.torque_limit

    def wcol(k, j):
        return 1 + (k * n_sub + j) * 4

    for k in range(q.n_steps):
        for j in range(n_sub):
            c0 = wcol(k, j)
            # torque box at both ends of the subphase, both channels/signs
            for (sigma, at_end) in ((0.0, False), (dt, True)):
                for c in range(2):
                    row = np.zeros(nvar)
                    row[c0 + c] = 1.0           # constant part
                    row[c0 + 2 + c] = sigma     # ramp part
                    nom = ws.u_nom[k, j + 1 if at_end else j, c]
                    for sign in (1.0, -1.0):
                        a_ub.append(sign * row)
                        b_ub.append(tq - sign * nom)
            step = ws.B_sub.copy()
            coeff = ws.A_sub @ coeff
            coeff[:, c0:c0 + 4] += step
        # footstep diamond at landing: nominal + deviation of x2 − x3
        dev_rows = coeff[2:4] - coeff[0:2]
        for srow in _DIAMOND_SIGNS:
            lhs = srow @ dev_rows
            a_ub.append(lhs)
            b_ub.append(q.diamond / 2.0 - float(srow @ ws.step_nom[k]))
        coeff = ws.J_event @ coeff

    a_eq = coeff                            # terminal error must vanish
    b_eq = np.zeros(8)
    cvec = np.zeros(nvar)
    cvec[0] = -1.0                          # maximize α
    bounds = [(0.0, None)] + [(None, None)] * n_w
    res = linprog(cvec, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 3:
        raise NumericalError("maximal viable scale is unbounded along this ray")
    if res.status != 0:
        return 0.0, f"lp[{res.status}]"
    return float(res.x[0]), "lp"


def lp_max_scale(query: ViableQuery, ray: np.ndarray,
                 workspace: _Workspace | None = None) -> RegionSample:
    """Largest feasible scale along one unit ray of initial event error."""
    ws = workspace if workspace is not None else _Workspace(query)
    ray = np.asarray(ray, dtype=float)
    if ray.shape != (6,):
        raise ValueError("ray must be a 6-vector in the reduced event space")
    nrm = np.linalg.norm(ray)
    if nrm == 0:
        raise ValueError("ray direction must be nonzero")
    ray = ray / nrm
    e0 = _EMBED6 @ ray
    if query.controller == "maximal":
        alpha, tag = _maximal_alpha(ws, e0)
    else:
        du_samples, step_dev = _closed_loop_deltas(ws, e0, query.controller)
        alpha, tag = _ratio_alpha(ws, du_samples, step_dev)
    angle = float(np.arctan2(ray[PLANES[query.plane][1]],
                             ray[PLANES[query.plane][0]]))
    return RegionSample(ray=ray, angle=angle, alpha_max=float(alpha), binding=tag)


def region_scan(query: ViableQuery) -> list[RegionSample]:
    """Ray-cast the viable region on the query's scan plane."""
    ws = _Workspace(query)
    i, j = PLANES[query.plane]
    samples = []
    for angle in np.linspace(0.0, 2.0 * np.pi, query.rays, endpoint=False):
        ray = np.zeros(6)
        ray[i] = np.cos(angle)
        ray[j] = np.sin(angle)
        samples.append(lp_max_scale(query, ray, workspace=ws))
    return samples


def region_scan_all(query: ViableQuery) -> dict[str, list[RegionSample]]:
    """Scan the same rays for the two controllers and the maximal set."""
    import dataclasses

    return {
        ctrl: region_scan(dataclasses.replace(query, controller=ctrl))
        for ctrl in ("dlqr", "projection", "maximal")
    }


@dataclass(frozen=True)
class LyapunovRecord:
    gamma: float
    status: str                 # "pass" | "fail" | "singular"
    t_singular: float | None = None
    eps0: float = 0.0


def lyapunov_scan(T: float, gammas: np.ndarray, samples: int = 1000) -> list[LyapunovRecord]:
    """Check V(t) = x²/2 decay under scalar time projection for each gain.

    Gains at or below 1 are rejected outright; gains whose feedback
    denominator has a root inside the phase are reported as singular.
    """
    lo, _, hi_proj = scalar_gain_bounds(T)
    records = []
    for g in np.atleast_1d(np.asarray(gammas, dtype=float)):
        if g <= lo:
            raise ValueError(f"gain {g} outside the admissible range (>{lo})")
        t0 = np.log(1.0 / (1.0 - 1.0 / g))
        if t0 <= T + 1e-12:
            records.append(LyapunovRecord(gamma=float(g), status="singular",
                                          t_singular=float(t0), eps0=1.0 - g))
            continue
        ts = np.linspace(0.0, T, samples)
        eps = np.array([scalar_projection_feedback(g, t) for t in ts])
        ok = eps[0] < 0 and np.all(eps[1:] < eps[0]) and np.all(np.diff(eps) < 0)
        records.append(LyapunovRecord(gamma=float(g),
                                      status="pass" if ok else "fail",
                                      eps0=float(eps[0])))
    return records


def scalar_demo(
    T: float = 1.0,
    q: float = 1.0,
    r: float = 1.0,
    disturbance: tuple[float, float, float] = (1.2, 1.4, 1.0),
    t_end: float = 6.0,
    dt: float = 1e-3,
) -> dict[str, np.ndarray]:
    """Disturbance rejection of the three controllers on dx/dt = x + u + w.

    Returns time series for the continuous gain, the event-based gain
    applied at multiples of T, and the time-projection law, under a
    rectangular disturbance pulse.
    """
    des = scalar_design(T, q, r)
    gam_d, gam_c = des.gamma_d, des.gamma_c
    w_on, w_off, w_mag = disturbance
    n = int(round(t_end / dt))
    t = np.linspace(0.0, n * dt, n + 1)
    x_c = np.zeros(n + 1)
    x_d = np.zeros(n + 1)
    x_p = np.zeros(n + 1)
    u_d = 0.0

    def w_at(s):
        return w_mag if w_on <= s < w_off else 0.0

    for i in range(n):
        s = t[i]
        if abs(s / T - round(s / T)) < 1e-9:    # event: refresh held input
            u_d = -gam_d * x_d[i]

        def f_c(s_, x_):
            return (1.0 - gam_c) * x_ + w_at(s_)

        def f_d(s_, x_):
            return x_ + u_d + w_at(s_)

        def f_p(s_, x_):
            tau = s_ - np.floor(s_ / T + 1e-12) * T
            du = x_ / (-np.exp(tau) / gam_d + np.exp(tau) - 1.0)
            return x_ + du + w_at(s_)

        for x_arr, f in ((x_c, f_c), (x_d, f_d), (x_p, f_p)):
            xi = x_arr[i]
            k1 = f(s, xi)
            k2 = f(s + dt / 2, xi + dt / 2 * k1)
            k3 = f(s + dt / 2, xi + dt / 2 * k2)
            k4 = f(s + dt, xi + dt * k3)
            x_arr[i + 1] = xi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    return {
        "t": t, "x_continuous": x_c, "x_dlqr": x_d, "x_projection": x_p,
        "gamma_discrete": np.array([gam_d]), "gamma_continuous": np.array([gam_c]),
    }
