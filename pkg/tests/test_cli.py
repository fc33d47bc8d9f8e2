"""CLI subcommands: config handling, outputs, exit codes, determinism."""

from gaitlab.cli import main

MINIMAL = """
[gait]
frequency_hz = 2.0
speed_mps = 1.0
"""

PUSH_SCENARIO = """
[gait]
frequency_hz = 2.0
speed_mps = 1.0

[controller]
kind = "open_loop"

[sim]
substeps = 20
n_steps = 30

[[push]]
phase = 0
start_pct = 0.1
end_pct = 0.4
fx_n = 60.0
"""


def cfg_file(tmp_path, text, name="scn.toml"):
    f = tmp_path / name
    f.write_text(text)
    return f


def test_gait_command(tmp_path, capsys):
    f = cfg_file(tmp_path, MINIMAL)
    out = tmp_path / "gait.csv"
    assert main(["gait", "--config", str(f), "--out", str(out)]) == 0
    txt = capsys.readouterr().out
    assert "residual" in txt
    assert out.exists()
    header = out.read_text().splitlines()[0]
    assert header.startswith("T_s,v_mps,dbar,residual")


def test_gait_zero_frequency_usage_error(tmp_path, capsys):
    f = cfg_file(tmp_path, "[gait]\nfrequency_hz = 0.0\nspeed_mps = 0.0\n")
    assert main(["gait", "--config", str(f)]) == 2


def test_bad_config_exit_code(tmp_path):
    f = cfg_file(tmp_path, "[model]\nbogus_key = 1\n")
    assert main(["gait", "--config", str(f)]) == 2


def test_simulate_fall_is_success(tmp_path, capsys):
    f = cfg_file(tmp_path, PUSH_SCENARIO)
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--config", str(f), "--out", str(out)]) == 0
    assert "fall = 1" in capsys.readouterr().out
    assert out.read_text().rstrip().splitlines()[-1].startswith("# fall=1")


def test_controller_override(tmp_path, capsys):
    f = cfg_file(tmp_path, PUSH_SCENARIO)
    assert main(["simulate", "--config", str(f), "--controller", "projection",
                 "--quiet"]) == 0
    # projection recovers the same push that fells the open-loop run
    assert capsys.readouterr().out == ""


def test_simulate_deterministic_output(tmp_path):
    f = cfg_file(tmp_path, PUSH_SCENARIO)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", str(f), "--out", str(a), "--quiet"]) == 0
    assert main(["simulate", "--config", str(f), "--out", str(b), "--quiet"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_eigen_command(tmp_path):
    f = cfg_file(tmp_path, "[eigen]\nf_min_hz = 1.0\nf_max_hz = 2.0\nf_step_hz = 0.5\n")
    out = tmp_path / "eigen.csv"
    assert main(["eigen", "--config", str(f), "--out", str(out), "--quiet"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "controller,f_stepss,lam1,lam2,lam3"
    assert len(lines) == 1 + 3 * 3


def test_viable_command(tmp_path, capsys):
    f = cfg_file(tmp_path, "[viable]\nrays = 8\n[gait]\nfrequency_hz = 3.0\nspeed_mps = 0.5\n")
    out = tmp_path / "viable.csv"
    assert main(["viable", "--config", str(f), "--out", str(out)]) == 0
    assert "nesting = ok" in capsys.readouterr().out
    assert len(out.read_text().splitlines()) == 1 + 3 * 8


def test_appendix_c_command(tmp_path, capsys):
    out = tmp_path / "scalar.csv"
    assert main(["appendix-c", "--out", str(out)]) == 0
    txt = capsys.readouterr().out
    assert "Gamma = 1.4334" in txt
    assert "2.3653" in txt
    assert out.read_text().splitlines()[0] == "t_s,x_continuous,x_dlqr,x_projection"


def test_push_sweep_command(tmp_path):
    f = cfg_file(tmp_path, """
[sweep]
start_pcts = [0.0, 0.4]
end_pcts = [0.4, 0.8]
fx_n = 40.0

[sim]
substeps = 20
n_steps = 4
""")
    out = tmp_path / "sweep.csv"
    assert main(["push-sweep", "--config", str(f), "--out", str(out), "--quiet"]) == 0
    assert out.read_text().splitlines()[0] == "controller,start_pct,end_pct,step1,step2,step3"


def test_server_mode_roundtrip(tmp_path):
    # run the ASGI app on a real socket and point the CLI at it
    import threading
    import time

    import uvicorn

    from gaitlab.service import app

    config = uvicorn.Config(app, host="127.0.0.1", port=8731, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    for _ in range(100):
        if server.started:
            break
        time.sleep(0.05)
    try:
        f = cfg_file(tmp_path, MINIMAL)
        out = tmp_path / "remote.csv"
        rc = main(["gait", "--config", str(f), "--out", str(out),
                   "--server", "http://127.0.0.1:8731", "--quiet"])
        assert rc == 0
        assert out.exists()
        bad = cfg_file(tmp_path, "[gait]\nfrequency_hz = 0.5\nspeed_mps = 2.0\n",
                       name="bad.toml")
        assert main(["gait", "--config", str(bad),
                     "--server", "http://127.0.0.1:8731"]) == 2
    finally:
        server.should_exit = True
        thread.join(timeout=5)
