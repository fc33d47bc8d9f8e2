"""Command-line client for the walking-control service.

Each subcommand builds a request from a TOML scenario file and either runs
the service handler in-process (default) or posts it to a running server
(`--server http://host:port`). Results land in a CSV next to a short
printed summary.

Exit codes: 0 success (a detected fall is a valid outcome), 2 bad usage or
configuration, 3 numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

from .config import FullConfig, load_config
from .errors import ConfigError, GaitlabError, NumericalError
from .service.app import (
    handle_appendix_c,
    handle_eigen,
    handle_gait,
    handle_push_sweep,
    handle_simulate,
    handle_viable,
)
from .service.schemas import (
    AppendixCRequest,
    EigenRequest,
    GaitRequest,
    PushSweepRequest,
    SimulateRequest,
    ViableRequest,
)

_COMMANDS = {
    "gait": ("/gait", GaitRequest, handle_gait),
    "simulate": ("/simulate", SimulateRequest, handle_simulate),
    "eigen": ("/eigen", EigenRequest, handle_eigen),
    "push-sweep": ("/push-sweep", PushSweepRequest, handle_push_sweep),
    "viable": ("/viable", ViableRequest, handle_viable),
    "appendix-c": ("/appendix-c", AppendixCRequest, handle_appendix_c),
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaitlab",
                                description="walking-control scenario runner")
    sub = p.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", type=Path, default=None,
                       help="TOML scenario file (defaults apply when omitted)")
        s.add_argument("--out", type=Path, default=None, help="CSV output path")
        s.add_argument("--controller", default=None,
                       help="override [controller].kind from the config")
        s.add_argument("--quiet", action="store_true")
        s.add_argument("--server", default=None,
                       help="base URL of a running service; default in-process")
    s = sub.add_parser("serve", help="run the HTTP service with uvicorn")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    return p


def _remote(server: str, path: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    if resp.status_code == 400:
        raise ConfigError(resp.json().get("detail", "bad request"))
    if resp.status_code >= 500:
        raise NumericalError(resp.json().get("detail", "server failure"))
    resp.raise_for_status()
    return resp.json()


def _summary_lines(command: str, data: dict) -> list[str]:
    if command == "gait":
        return [
            f"T = {data['period_s']:.6g} s   f = {data['frequency_hz']:.6g} steps/s"
            f"   v = {data['speed_mps']:.6g} m/s   D = {data['dbar']:+.0f}",
            "Qbar = " + " ".join(f"{x:.6g}" for x in data["qbar"]),
            "Ubar = " + " ".join(f"{x:.6g}" for x in data["ubar"]),
            f"periodicity residual = {data['residual']:.3e}",
        ]
    if command == "simulate":
        lines = [
            f"controller = {data['controller']}   steps = {data['n_steps_completed']}"
            f"   max |e| = {data['max_err_norm']:.3e}"
            f"   final |e| = {data['final_err_norm']:.3e}",
        ]
        if data["fall"]:
            lines.append(f"fall = 1 (step {data['fall_step']})")
        return lines
    if command == "eigen":
        lines = []
        for ctrl, rows in data["rows"].items():
            mx = max(r[0] for r in rows)
            lines.append(f"{ctrl}: max |lambda| over grid = {mx:.4f}")
        return lines
    if command == "push-sweep":
        return [f"controllers = {', '.join(data['controllers'])}   grid = "
                f"{len(data['start_pcts'])}x{len(data['end_pcts'])}"]
    if command == "viable":
        mean = ", ".join(f"{c}={v:.4f}" for c, v in data["mean_alpha"].items())
        lines = [f"rays = {data['rays']}   plane = {data['plane']}   "
                 f"nesting = {'ok' if data['nesting_ok'] else 'VIOLATED'}",
                 f"mean alpha: {mean}"]
        if data.get("mean_alpha_f2"):
            mean2 = ", ".join(f"{c}={v:.4f}" for c, v in data["mean_alpha_f2"].items())
            lines.append(f"mean alpha (second frequency): {mean2}")
        return lines
    if command == "appendix-c":
        return [
            f"Gamma = {data['gamma_discrete']:.4f}   "
            f"gamma_continuous = {data['gamma_continuous']:.4f}",
            f"gain bounds: ({data['bound_lo']:.4f}, {data['bound_hi_event']:.4f})"
            f", tightened upper = {data['bound_hi_projection']:.4f}",
        ]
    return []


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        uvicorn.run("gaitlab.service:app", host=args.host, port=args.port)
        return 0

    path, req_cls, handler = _COMMANDS[args.command]
    try:
        cfg = load_config(args.config) if args.config else FullConfig()
        if args.controller is not None:
            cfg = cfg.model_copy(update={
                "controller": cfg.controller.model_copy(
                    update={"kind": args.controller})})
        req = req_cls.from_config(cfg)
        if args.server:
            data = _remote(args.server, path, json.loads(req.model_dump_json()))
        else:
            data = json.loads(handler(req).model_dump_json())
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, GaitlabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(data["csv"])
        if not args.quiet:
            print(f"wrote {args.out}")
    if not args.quiet:
        for line in _summary_lines(args.command, data):
            print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
