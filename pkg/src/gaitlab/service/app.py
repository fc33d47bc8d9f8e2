"""HTTP service around the walking toolkit.

Every endpoint is a thin wrapper: validate the request, run the
corresponding library call, and return a summary plus a ready-to-plot CSV
document. Handlers are plain functions so the CLI can invoke them
in-process without a running server.
"""

import numpy as np
from fastapi import FastAPI, HTTPException

from ..analysis import (
    PLANES,
    ViableQuery,
    poincare_eigenvalues,
    push_sweep,
    region_scan,
    scalar_demo,
)
from ..control import scalar_design
from ..errors import ConfigError, GaitlabError, NumericalError
from ..gait import periodicity_residual, solve_periodic_gait
from ..models import build_model
from ..sim import CONTROLLERS, PushEvent, Scenario, speed_track
from .schemas import (
    AppendixCRequest,
    AppendixCResponse,
    EigenRequest,
    EigenResponse,
    GaitRequest,
    GaitResponse,
    PushSweepRequest,
    PushSweepResponse,
    SimulateRequest,
    SimulateResponse,
    ViableRequest,
    ViableResponse,
)


def _fmt(x: float) -> str:
    """Deterministic shortest float representation."""
    return f"{float(x):.17g}"


def _csv(header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"


def handle_gait(req: GaitRequest) -> GaitResponse:
    params = req.model.body_params()
    model = build_model(req.model.kind, params)
    g = solve_periodic_gait(model, req.gait.frequency_hz, req.gait.speed_mps)
    res = periodicity_residual(model, g)
    header = ("T_s,v_mps,dbar,residual,"
              + ",".join(f"qbar_{i}" for i in range(12)) + ","
              + ",".join(f"ubar_{i}" for i in range(4)))
    row = [_fmt(g.T), _fmt(g.v), _fmt(g.dbar), _fmt(res)]
    row += [_fmt(x) for x in g.qbar] + [_fmt(x) for x in g.ubar]
    return GaitResponse(
        period_s=g.T, frequency_hz=g.f, speed_mps=g.v, dbar=g.dbar,
        residual=res, qbar=list(g.qbar), ubar=list(g.ubar),
        csv=_csv(header, [row]),
    )


def _scenario(req: SimulateRequest, controller: str | None = None) -> Scenario:
    kind = controller or req.controller.kind
    if kind not in CONTROLLERS:
        raise ConfigError(f"controller must be one of {CONTROLLERS}, got {kind!r}")
    return Scenario(
        params=req.model.body_params(),
        f=req.gait.frequency_hz,
        v=req.gait.speed_mps,
        controller=kind,
        model_kind=req.model.kind,
        substeps=req.sim.substeps,
        n_steps=req.sim.n_steps,
        pushes=tuple(
            PushEvent(phase=p.phase, start_pct=p.start_pct, end_pct=p.end_pct,
                      force=(p.fx_n, p.fy_n))
            for p in req.push
        ),
        speed_schedule=tuple((s.step, s.v_mps) for s in req.speed),
        q_scale=req.controller.q_scale,
        r_scale=req.controller.r_scale,
    )


SIM_HEADER = ("t_s,phase,controller,x1x,x1y,x2x,x2y,x3x,x3y,"
              "v1x,v1y,err_norm,du_norm,push_active")


def handle_simulate(req: SimulateRequest, controller: str | None = None) -> SimulateResponse:
    scn = _scenario(req, controller)
    log, speeds, rms = speed_track(scn)
    du_norm = log.du_norms()
    rows = []
    for i in range(len(log.t)):
        q = log.q[i]
        rows.append([
            _fmt(log.t[i]), str(int(log.phase[i])), scn.controller,
            _fmt(q[2]), _fmt(q[3]), _fmt(q[0]), _fmt(q[1]),
            _fmt(q[4]), _fmt(q[5]), _fmt(q[8]), _fmt(q[9]),
            _fmt(log.err_norm[i]), _fmt(du_norm[i]), str(int(log.push_active[i])),
        ])
    csv = _csv(SIM_HEADER, rows)
    if log.fall:
        csv += f"# fall=1 step={log.fall_step}\n"
    return SimulateResponse(
        controller=scn.controller,
        n_steps_completed=len(log.events),
        fall=log.fall,
        fall_step=log.fall_step,
        max_err_norm=float(np.max(log.err_norm)) if len(log.err_norm) else 0.0,
        final_err_norm=float(log.err_norm[-1]) if len(log.err_norm) else 0.0,
        step_speeds_mps=[float(s) for s in speeds],
        step_du_rms=[float(r) for r in rms],
        csv=csv,
    )


def handle_eigen(req: EigenRequest) -> EigenResponse:
    e = req.eigen
    if e.f_step_hz <= 0 or e.f_max_hz < e.f_min_hz:
        raise ConfigError("eigen frequency grid is empty")
    freqs = list(np.arange(e.f_min_hz, e.f_max_hz + 1e-9, e.f_step_hz))
    params = req.model.body_params()
    rows_out = {}
    csv_rows = []
    for ctrl in ("open_loop", "dlqr", "projection"):
        per_f = []
        for f in freqs:
            lam = poincare_eigenvalues(
                params, ctrl, float(f), model_kind=req.model.kind,
                q_scale=req.controller.q_scale, r_scale=req.controller.r_scale,
            )
            per_f.append([float(x) for x in lam])
            csv_rows.append([ctrl, _fmt(f)] + [_fmt(x) for x in lam])
        rows_out[ctrl] = per_f
    return EigenResponse(
        frequencies_hz=[float(f) for f in freqs],
        rows=rows_out,
        csv=_csv("controller,f_stepss,lam1,lam2,lam3", csv_rows),
    )


def handle_push_sweep(req: PushSweepRequest) -> PushSweepResponse:
    sw = req.sweep
    controllers = ("open_loop", "dlqr", "projection")
    surfaces = push_sweep(
        req.model.body_params(), req.gait.frequency_hz, req.gait.speed_mps,
        (sw.fx_n, sw.fy_n), np.asarray(sw.start_pcts), np.asarray(sw.end_pcts),
        controllers=controllers, n_events=sw.n_events,
        substeps=req.sim.substeps, model_kind=req.model.kind,
    )
    rows = []
    for ctrl in controllers:
        surf = surfaces[ctrl]
        for i, s in enumerate(sw.start_pcts):
            for j, e in enumerate(sw.end_pcts):
                vals = surf[i, j]
                rows.append([ctrl, _fmt(s), _fmt(e)]
                            + [("nan" if np.isnan(x) else _fmt(x)) for x in vals])
    header = "controller,start_pct,end_pct," + ",".join(
        f"step{k + 1}" for k in range(sw.n_events))
    return PushSweepResponse(
        controllers=list(controllers),
        start_pcts=list(sw.start_pcts),
        end_pcts=list(sw.end_pcts),
        csv=_csv(header, rows),
    )


def handle_viable(req: ViableRequest) -> ViableResponse:
    vb = req.viable
    params = req.model.body_params()

    def scan(f: float) -> dict[str, list]:
        out = {}
        for ctrl in ("dlqr", "projection", "maximal"):
            q = ViableQuery(
                params=params, f=f, v=req.gait.speed_mps, controller=ctrl,
                n_steps=vb.n_steps, subphases=vb.subphases,
                torque_limit=vb.torque_nm, diamond=vb.diamond_m,
                rays=vb.rays, plane=vb.plane, model_kind=req.model.kind,
                q_scale=req.controller.q_scale, r_scale=req.controller.r_scale,
            )
            out[ctrl] = region_scan(q)
        return out

    main = scan(req.gait.frequency_hz)
    alpha = {c: np.array([s.alpha_max for s in main[c]]) for c in main}
    nesting = bool(
        np.all(alpha["dlqr"] <= alpha["projection"] + 1e-9)
        and np.all(alpha["projection"] <= alpha["maximal"] + 1e-6)
    )
    rows = []
    for ctrl, samples in main.items():
        for s in samples:
            rows.append([ctrl, _fmt(req.gait.frequency_hz), _fmt(s.angle),
                         _fmt(s.alpha_max), s.binding])
    mean_f2 = None
    if vb.f2_hz is not None:
        second = scan(vb.f2_hz)
        mean_f2 = {c: float(np.mean([s.alpha_max for s in second[c]])) for c in second}
        for ctrl, samples in second.items():
            for s in samples:
                rows.append([ctrl, _fmt(vb.f2_hz), _fmt(s.angle),
                             _fmt(s.alpha_max), s.binding])
    return ViableResponse(
        rays=vb.rays, plane=vb.plane, nesting_ok=nesting,
        mean_alpha={c: float(v.mean()) for c, v in alpha.items()},
        mean_alpha_f2=mean_f2,
        csv=_csv("controller,f_stepss,ray_angle_rad,alpha,binding", rows),
    )


def handle_appendix_c(req: AppendixCRequest) -> AppendixCResponse:
    ac = req.appendix_c
    des = scalar_design(ac.period_s, ac.q_cost, ac.r_cost)
    demo = scalar_demo(
        T=ac.period_s, q=ac.q_cost, r=ac.r_cost,
        disturbance=(ac.disturb_start_s, ac.disturb_end_s, ac.disturb_n),
        t_end=ac.t_end_s,
    )
    rows = [
        [_fmt(demo["t"][i]), _fmt(demo["x_continuous"][i]),
         _fmt(demo["x_dlqr"][i]), _fmt(demo["x_projection"][i])]
        for i in range(0, len(demo["t"]), 10)
    ]
    return AppendixCResponse(
        gamma_discrete=des.gamma_d,
        gamma_continuous=des.gamma_c,
        bound_lo=des.lo,
        bound_hi_event=des.hi_dlqr,
        bound_hi_projection=des.hi_proj,
        csv=_csv("t_s,x_continuous,x_dlqr,x_projection", rows),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="gaitlab", version="0.1.0",
                  description="Walking-control toolkit service")

    def guard(fn, *args):
        try:
            return fn(*args)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except NumericalError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        except GaitlabError as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/gait", response_model=GaitResponse)
    def gait(req: GaitRequest):
        return guard(handle_gait, req)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        return guard(handle_simulate, req)

    @app.post("/eigen", response_model=EigenResponse)
    def eigen(req: EigenRequest):
        return guard(handle_eigen, req)

    @app.post("/push-sweep", response_model=PushSweepResponse)
    def sweep(req: PushSweepRequest):
        return guard(handle_push_sweep, req)

    @app.post("/viable", response_model=ViableResponse)
    def viable(req: ViableRequest):
        return guard(handle_viable, req)

    @app.post("/appendix-c", response_model=AppendixCResponse)
    def appendix_c(req: AppendixCRequest):
        return guard(handle_appendix_c, req)

    return app


app = create_app()
