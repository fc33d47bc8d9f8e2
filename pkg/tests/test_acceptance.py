"""Acceptance suite: one check per shipped guarantee, printed pass/fail.

Run with `pytest tests/test_acceptance.py -v -s` to see one line per
criterion. Two checks encode expectations the implemented model family
provably cannot meet and are left to report honestly:

* criterion 8: pushes leave a terminal swing-foot velocity error that an
  event-based controller can only start removing one phase later; the
  best achievable step-3/step-1 error ratio over the window grid is
  0.37-0.50 for mid/late pushes (any controller), so the 10 % target is
  out of reach.
* criterion 10: between 1.4 and 3 steps/s the viable regions are bound by
  the footstep diamond, whose per-unit-error consumption falls as phases
  get shorter, so the mean region scale grows; the expected shrink from
  hip-torque saturation only sets in beyond roughly 4 steps/s.
"""

import time

import numpy as np
import pytest

from gaitlab.analysis import (
    ViableQuery,
    lyapunov_scan,
    poincare_eigenvalues,
    push_sweep,
    region_scan_all,
)
from gaitlab.control import scalar_design, scalar_gain_bounds
from gaitlab.gait import periodicity_residual, solve_periodic_gait
from gaitlab.lti import transition
from gaitlab.models import BodyParams, build_3lp, build_lip, symmetry_ops
from gaitlab.sim import PushEvent, Scenario, run_walk, speed_track

from oracles import rk4_phase

PARAMS = BodyParams(mass=70.0, height=1.7)
F_GRID = [round(0.8 + 0.2 * i, 1) for i in range(12)]       # 0.8 .. 3.0


def report(num: int, ok: bool, detail: str):
    print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_scalar_gains():
    t0 = time.perf_counter()
    des = scalar_design(1.0, 1.0, 1.0)
    elapsed = time.perf_counter() - t0
    ok = (abs(des.gamma_d - 1.43) <= 0.01
          and abs(des.gamma_c - 2.37) <= 0.01
          and elapsed < 1.0)
    report(1, ok, f"Gamma={des.gamma_d:.4f} (|Δ|≤0.01), "
                  f"gamma_c={des.gamma_c:.4f} (|Δ|≤0.01), {elapsed:.3f}s < 1s")


def test_criterion_02_gain_bounds():
    lo, hi_event, hi_proj = scalar_gain_bounds(1.0)
    des = scalar_design(1.0, 1.0, 1.0)
    ok = (abs(lo - 1.0) <= 1e-4
          and abs(hi_event - 2.1640) <= 1e-4
          and abs(hi_proj - 1.5820) <= 1e-4
          and lo < des.gamma_d < hi_proj)
    report(2, ok, f"bounds=({lo:.4f}, {hi_event:.4f}, {hi_proj:.4f}) ±1e-4, "
                  f"Gamma={des.gamma_d:.4f} strictly inside (1, {hi_proj:.4f})")


def test_criterion_03_closed_form_vs_rk4():
    t0 = time.perf_counter()
    worst = 0.0
    T = 0.5
    rng = np.random.default_rng(33)
    for model in (build_3lp(PARAMS), build_lip(BodyParams(mass=70.0, height=1.0))):
        ts = transition(model, T)
        for _ in range(10):
            q0 = rng.standard_normal(12)
            u = rng.standard_normal(4)
            closed = ts.A @ q0 + ts.B @ u + ts.C * 1.0
            ref = rk4_phase(model, q0, u, 1.0, T, dt=1e-4)
            worst = max(worst, np.max(np.abs(closed - ref))
                        / max(1.0, np.max(np.abs(ref))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    report(3, ok, f"3LP+LIP vs RK4(1e-4), 10 random states each: "
                  f"rel err {worst:.2e} ≤ 1e-8, {elapsed:.1f}s < 10s")


def test_criterion_04_symmetry_algebra():
    ops = symmetry_ops()
    ok = (np.array_equal(ops.M @ ops.Mhat, np.eye(8))
          and np.array_equal(ops.S @ ops.S, np.eye(12))
          and np.array_equal(ops.O @ ops.O, np.eye(8)))
    report(4, ok, "M·M̂ = I₈ exact, S·S = I, O·O = I")


def test_criterion_05_gait_validity():
    # replay drift is measured per step against the exact reduced nominal
    # (the event state rebased through M-hat each step): open-loop radii up
    # to ~30 at f=0.8 amplify any floating-point seed by ~5e14 over ten
    # compounded steps, so only the per-step defect is a testable quantity
    model = build_3lp(PARAMS)
    ops = symmetry_ops()
    lat_u = np.diag([1.0, -1.0, 1.0, -1.0])
    worst_res, worst_drift = 0.0, 0.0
    for f in (0.8, 1.4, 2.0, 2.6, 3.0):
        for v in (0.0, 0.5, 1.0):
            g = solve_periodic_gait(model, f, v)
            worst_res = max(worst_res, periodicity_residual(model, g))
            ts = transition(model, g.T)
            m0 = ops.M @ g.qbar
            u, d = g.ubar.copy(), g.dbar
            m_prev = m0
            for k in range(1, 11):
                q = ops.S @ (ts.A @ (ops.Mhat @ m_prev) + ts.B @ u + ts.C * d)
                u, d = lat_u @ u, -d
                want = ops.O @ m_prev
                drift = max(np.max(np.abs(ops.M @ q - want)),
                            np.max(np.abs(ops.N @ q)))
                worst_drift = max(worst_drift, drift)
                m_prev = want
    ok = worst_res <= 1e-9 and worst_drift <= 1e-6
    report(5, ok, f"15 (f,v) gaits: residual {worst_res:.2e} ≤ 1e-9, "
                  f"per-step replay drift {worst_drift:.2e} ≤ 1e-6 over 10 steps")


def test_criterion_06_stability_table():
    t0 = time.perf_counter()
    open_r, closed_r, dev = [], [], 0.0
    for f in F_GRID:
        lam_o = poincare_eigenvalues(PARAMS, "open_loop", f)
        lam_d = poincare_eigenvalues(PARAMS, "dlqr", f)
        lam_p = poincare_eigenvalues(PARAMS, "projection", f)
        open_r.append(lam_o[0])
        closed_r.append(lam_d[0])
        dev = max(dev, float(np.max(np.abs(lam_d - lam_p))))
    elapsed = time.perf_counter() - t0
    ok = (all(r > 1.0 for r in open_r)
          and open_r[0] == max(open_r)
          and all(open_r[0] > r for r in open_r[1:])
          and all(r < 1.0 for r in closed_r)
          and dev <= 1e-10
          and elapsed < 10.0)
    report(6, ok, f"open-loop radius in [{min(open_r):.2f},{max(open_r):.2f}] "
                  f"all >1, largest at f=0.8; closed-loop max "
                  f"{max(closed_r):.3f} <1; |dlqr−proj| {dev:.1e} ≤1e-10; "
                  f"{elapsed:.1f}s < 10s")


def test_criterion_07_event_equivalence():
    kw = dict(params=PARAMS, f=2.0, v=0.5, n_steps=10, substeps=20,
              speed_schedule=((2, 1.0), (6, 0.3)))
    log_d = run_walk(Scenario(controller="dlqr", **kw))
    log_p = run_walk(Scenario(controller="projection", **kw))
    log_dev = max(
        float(np.max(np.abs(log_d.q - log_p.q))),
        float(np.max(np.abs(log_d.qbar - log_p.qbar))),
        float(np.max(np.abs(log_d.du - log_p.du))),
        float(np.max(np.abs(log_d.err_norm - log_p.err_norm))),
    )
    _, speeds, _ = speed_track(Scenario(controller="projection", params=PARAMS,
                                        f=2.0, v=0.5, n_steps=8,
                                        speed_schedule=((3, 1.0),)))
    settle_ok = all(abs(speeds[k] - 1.0) <= 0.05 * 1.0 for k in range(5, 8))
    ok = log_dev <= 1e-9 and settle_ok
    report(7, ok, f"event-only disturbances: log deviation {log_dev:.2e} ≤ 1e-9; "
                  f"0.5→1.0 m/s settles within 5% two steps after the change")


def test_criterion_08_push_recovery_ordering():
    t0 = time.perf_counter()
    starts = np.linspace(0.0, 0.8, 5)
    ends = np.linspace(0.2, 1.0, 5)
    out = push_sweep(PARAMS, 2.0, 0.5, (40.0, 0.0), starts, ends, n_events=3)
    ol, dq, pj = out["open_loop"], out["dlqr"], out["projection"]
    valid = ~np.isnan(ol[:, :, 0]) & (ol[:, :, 0] > 0)
    dominance = bool(np.all(pj[valid][:, 1] <= dq[valid][:, 1] + 1e-12)
                     and np.all(pj[valid][:, 2] <= dq[valid][:, 2] + 1e-12))
    diverges = bool(np.all(ol[valid][:, 2] > ol[valid][:, 0]))
    rec_d = float(np.max(dq[valid][:, 2] / dq[valid][:, 0]))
    rec_p = float(np.max(pj[valid][:, 2] / pj[valid][:, 0]))
    recovery = rec_d < 0.10 and rec_p < 0.10
    elapsed = time.perf_counter() - t0
    ok = dominance and diverges and recovery and elapsed < 60.0
    report(8, ok, f"projection ≤ dlqr pointwise at steps 2,3: {dominance}; "
                  f"open loop diverges: {diverges}; "
                  f"step3 < 10% of step1: dlqr worst {rec_d:.2f}, "
                  f"projection worst {rec_p:.2f}; {elapsed:.1f}s < 60s")


def test_criterion_09_post_push_constancy():
    scn = Scenario(params=PARAMS, f=2.0, v=1.0, controller="projection",
                   n_steps=4,
                   pushes=(PushEvent(phase=0, start_pct=0.10, end_pct=0.30,
                                     force=(40.0, 0.0)),))
    log = run_walk(scn)
    T = 1.0 / scn.f
    dt = T / scn.substeps
    rows = (log.phase == 0) & (log.t >= 0.30 * T + dt)
    du = log.du[rows]
    dev = float(np.max(np.abs(du - du[0])))
    for k in (1, 2, 3):
        du_k = log.du[log.phase == k]
        dev = max(dev, float(np.max(np.abs(du_k - du_k[0]))))
    ok = dev <= 1e-9
    report(9, ok, f"corrective parameters vary {dev:.2e} ≤ 1e-9 across "
                  f"substeps after the push window closes")


def test_criterion_10_viable_region_nesting():
    t0 = time.perf_counter()
    means = {}
    nesting = True
    for f in (3.0, 1.4):
        res = region_scan_all(ViableQuery(params=PARAMS, f=f, v=0.5, rays=100))
        a = {c: np.array([s.alpha_max for s in res[c]]) for c in res}
        if f == 3.0:
            nesting = bool(np.all(a["dlqr"] <= a["projection"] + 1e-9)
                           and np.all(a["projection"] <= a["maximal"] + 1e-6))
        means[f] = float(np.mean(a["projection"]))
    shrink = means[3.0] < means[1.4]
    elapsed = time.perf_counter() - t0
    ok = nesting and shrink and elapsed < 300.0
    report(10, ok, f"nesting on all 100 rays at v=0.5, f=3: {nesting}; "
                   f"mean α f=1.4→3.0: {means[1.4]:.3f}→{means[3.0]:.3f} "
                   f"decrease: {shrink}; {elapsed:.0f}s < 300s")


def test_criterion_11_lp_toy_oracle():
    from scipy.optimize import linprog

    e = np.e
    u_max = 1.0
    res = linprog([-1.0, 0.0, 0.0],
                  A_eq=[[e * e, e * (e - 1.0), (e - 1.0)]], b_eq=[0.0],
                  bounds=[(0.0, None), (-u_max, u_max), (-u_max, u_max)],
                  method="highs")
    alpha_lp = float(res.x[0])
    grid = np.linspace(-u_max, u_max, 201)
    best = 0.0
    for u0 in grid:
        for u1 in grid:
            x0 = -(e * (e - 1.0) * u0 + (e - 1.0) * u1) / (e * e)
            best = max(best, abs(x0))
    rel = abs(alpha_lp - best) / best
    ok = rel <= 0.02
    report(11, ok, f"2-step scalar capture: LP α={alpha_lp:.4f} vs "
                   f"brute-force {best:.4f}, rel diff {rel:.2e} ≤ 2%")


def test_criterion_12_lyapunov_scan():
    _, _, hi = scalar_gain_bounds(1.0)
    gammas = np.linspace(1.0 + 1e-4, hi - 1e-4, 50)
    recs = lyapunov_scan(1.0, gammas)
    all_pass = all(r.status == "pass" for r in recs)
    above = lyapunov_scan(1.0, [hi + 0.02])
    singular_detected = above[0].status == "singular" and above[0].t_singular <= 1.0
    ok = all_pass and singular_detected
    report(12, ok, f"50 gains in (1, {hi:.4f}): V(t) strictly decreasing for "
                   f"all; gain {hi + 0.02:.4f} flags in-phase singularity at "
                   f"t0={above[0].t_singular:.3f}")
