"""HTTP endpoints exercised through the ASGI test client."""

import pytest
from fastapi.testclient import TestClient

from gaitlab.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_gait_endpoint(client):
    r = client.post("/gait", json={
        "model": {"kind": "3lp", "mass_kg": 70.0, "height_m": 1.7},
        "gait": {"frequency_hz": 2.0, "speed_mps": 1.0},
    })
    assert r.status_code == 200
    data = r.json()
    assert data["period_s"] == pytest.approx(0.5)
    assert data["residual"] <= 1e-9
    assert len(data["qbar"]) == 12 and len(data["ubar"]) == 4
    assert data["csv"].splitlines()[0].startswith("T_s,v_mps,dbar,residual")


def test_gait_endpoint_rejects_infeasible(client):
    r = client.post("/gait", json={"gait": {"frequency_hz": 0.5, "speed_mps": 2.0}})
    assert r.status_code == 400


def test_gait_endpoint_rejects_unknown_keys(client):
    r = client.post("/gait", json={"model": {"mass_lb": 154}})
    assert r.status_code == 422


def test_simulate_endpoint_with_push(client):
    r = client.post("/simulate", json={
        "gait": {"frequency_hz": 2.0, "speed_mps": 1.0},
        "controller": {"kind": "projection"},
        "sim": {"substeps": 25, "n_steps": 5},
        "push": [{"phase": 0, "start_pct": 0.1, "end_pct": 0.3, "fx_n": 40.0}],
    })
    assert r.status_code == 200
    data = r.json()
    assert data["fall"] is False
    assert data["n_steps_completed"] == 5
    header = data["csv"].splitlines()[0]
    assert header == ("t_s,phase,controller,x1x,x1y,x2x,x2y,x3x,x3y,"
                      "v1x,v1y,err_norm,du_norm,push_active")
    assert len(data["csv"].splitlines()) == 1 + 5 * 25


def test_simulate_fall_footer(client):
    r = client.post("/simulate", json={
        "controller": {"kind": "open_loop"},
        "sim": {"substeps": 20, "n_steps": 30},
        "push": [{"phase": 0, "start_pct": 0.1, "end_pct": 0.4, "fx_n": 60.0}],
    })
    assert r.status_code == 200
    data = r.json()
    assert data["fall"] is True
    assert data["csv"].rstrip().splitlines()[-1].startswith("# fall=1")


def test_eigen_endpoint(client):
    r = client.post("/eigen", json={
        "eigen": {"f_min_hz": 1.0, "f_max_hz": 2.0, "f_step_hz": 0.5},
    })
    assert r.status_code == 200
    data = r.json()
    assert data["frequencies_hz"] == [1.0, 1.5, 2.0]
    assert set(data["rows"]) == {"open_loop", "dlqr", "projection"}
    for lam in data["rows"]["dlqr"]:
        assert lam[0] < 1.0
    for lam in data["rows"]["open_loop"]:
        assert lam[0] > 1.0


def test_push_sweep_endpoint(client):
    r = client.post("/push-sweep", json={
        "gait": {"frequency_hz": 2.0, "speed_mps": 0.5},
        "sweep": {"start_pcts": [0.0, 0.4], "end_pcts": [0.4, 0.8],
                  "fx_n": 40.0, "n_events": 3},
        "sim": {"substeps": 25, "n_steps": 4},
    })
    assert r.status_code == 200
    data = r.json()
    lines = data["csv"].splitlines()
    assert lines[0] == "controller,start_pct,end_pct,step1,step2,step3"
    assert len(lines) == 1 + 3 * 4


def test_viable_endpoint(client):
    r = client.post("/viable", json={
        "gait": {"frequency_hz": 3.0, "speed_mps": 0.5},
        "viable": {"rays": 8, "n_steps": 6, "subphases": 5},
    })
    assert r.status_code == 200
    data = r.json()
    assert data["nesting_ok"] is True
    assert set(data["mean_alpha"]) == {"dlqr", "projection", "maximal"}
    assert data["csv"].splitlines()[0] == "controller,f_stepss,ray_angle_rad,alpha,binding"
    assert len(data["csv"].splitlines()) == 1 + 3 * 8


def test_appendix_c_endpoint(client):
    r = client.post("/appendix-c", json={})
    assert r.status_code == 200
    data = r.json()
    assert data["gamma_discrete"] == pytest.approx(1.4334, abs=1e-3)
    assert data["gamma_continuous"] == pytest.approx(2.3653, abs=1e-3)
    assert data["bound_hi_event"] == pytest.approx(2.1640, abs=1e-4)
    assert data["bound_hi_projection"] == pytest.approx(1.5820, abs=1e-4)


def test_deterministic_csv(client):
    body = {
        "sim": {"substeps": 20, "n_steps": 4},
        "push": [{"phase": 0, "start_pct": 0.2, "end_pct": 0.5, "fx_n": 25.0}],
    }
    a = client.post("/simulate", json=body).json()["csv"]
    b = client.post("/simulate", json=body).json()["csv"]
    assert a == b
