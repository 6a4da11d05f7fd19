"""Command-line entry points: serve, batch, validate, report, backend."""

from __future__ import annotations

import argparse
import asyncio
import json
import socket
import sys
from pathlib import Path

from .errors import KinescriptError, PortInUse
from .planner import QualityThresholds
from .registry import load_registry, registry


def _load_reg(args):
    if getattr(args, "registry", None) or getattr(args, "banks", None):
        return load_registry(args.registry, args.banks)
    return registry()


def cmd_serve(args) -> int:
    import uvicorn

    from .service import BridgeDaemon, create_app

    reg = _load_reg(args)
    probe = socket.socket()
    try:
        probe.bind((args.host, args.port))
    except OSError as e:
        raise PortInUse(f"{args.host}:{args.port} is already bound: {e}") from e
    finally:
        probe.close()

    daemon = BridgeDaemon(
        reg=reg,
        backend=args.backend,
        command_addr=args.command_addr,
        telemetry_addr=args.telemetry_addr,
        record_keyboard=args.record_keyboard,
        out_dir=args.out,
        seed=args.seed,
        event_log=args.event_log,
    )
    frontend = Path(args.frontend_dir) if args.frontend_dir else Path.cwd() / "frontend"
    app = create_app(daemon, frontend_dir=frontend)
    print(f"frontend: http://{args.host}:{args.port}/  "
          f"(channel: ws://{args.host}:{args.port}/ws)", flush=True)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_backend(args) -> int:
    from .backend import run_standalone

    reg = _load_reg(args)
    try:
        asyncio.run(run_standalone(args.command_addr, args.telemetry_addr, reg))
    except KeyboardInterrupt:
        pass
    return 0


def cmd_batch(args) -> int:
    from .batch import run_batch

    report = run_batch(
        recipe_paths=args.recipes,
        out_dir=args.out,
        seed=args.seed,
        sweeps=args.sweep,
        filter_transitions=not args.no_filter,
        thresholds=QualityThresholds(speed_jump=args.speed_jump_threshold,
                                     height_rate=args.height_rate_threshold),
        jobs=args.jobs,
        registry_path=args.registry,
        banks_path=args.banks,
    )
    print(f"generated {report['generated']} package(s), "
          f"filtered {report['filtered']}; report at {args.out}/report.json")
    return 0


def cmd_validate(args) -> int:
    from .dataset import load_package, validate

    reg = _load_reg(args)
    pkg = load_package(args.path, check=False, reg=reg)
    violations = validate(pkg, reg)
    for v in violations:
        print(v)
    if violations:
        return 1
    print(f"{args.path}: ok "
          f"({len(pkg.reference)} samples, {len(pkg.segments)} segments)")
    return 0


def cmd_report(args) -> int:
    from .dataset import load_package
    from .report import (load_batch_report, render_batch_figure,
                         render_session_report)

    path = Path(args.path)
    out = Path(args.out) if args.out else path / "report"
    written: list[Path] = []
    if (path / "manifest.json").exists():
        pkg = load_package(path, check=False)
        written += render_session_report(pkg, out)
    elif (path / "report.json").exists():
        out.mkdir(parents=True, exist_ok=True)
        doc = load_batch_report(path)
        written.append(render_batch_figure(doc, out / "batch_quality.png"))
        if args.sessions:
            for run in doc["runs"]:
                if run["path"]:
                    pkg = load_package(path / run["path"], check=False)
                    written += render_session_report(pkg, out / run["run_id"])
    else:
        raise KinescriptError(f"{path} is neither a package nor a batch directory")
    for p in written:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinescript",
        description="Motion-primitive trajectory generation with deterministic "
                    "language annotation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the interactive bridge service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--backend", choices=("builtin", "external"), default="builtin")
    p.add_argument("--command-addr", default="", help="external planner command channel host:port")
    p.add_argument("--telemetry-addr", default="", help="external planner telemetry channel host:port")
    p.add_argument("--record-keyboard", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", default="sessions", help="directory for recorded session packages")
    p.add_argument("--seed", type=int, default=0, help="annotation seed for keyboard sessions")
    p.add_argument("--event-log", default=None, help="append received UI events to this file")
    p.add_argument("--frontend-dir", default=None, help="static frontend root (default ./frontend)")
    p.add_argument("--registry", default=None, help="custom modes.json")
    p.add_argument("--banks", default=None, help="custom banks.json")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("backend", help="run the reference planner backend standalone")
    p.add_argument("--command-addr", default="127.0.0.1:7401")
    p.add_argument("--telemetry-addr", default="127.0.0.1:7402")
    p.add_argument("--registry", default=None)
    p.add_argument("--banks", default=None)
    p.set_defaults(func=cmd_backend)

    p = sub.add_parser("batch", help="generate packages from recipe files")
    p.add_argument("--recipes", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="annotation seed (default: each recipe's own seed)")
    p.add_argument("--sweep", action="append", default=[],
                   help="<mode-or-*>.<field>=v1,v2,...  (repeatable; cartesian product)")
    p.add_argument("--no-filter", action="store_true",
                   help="write packages even when the transition filter fails")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--speed-jump-threshold", type=float, default=QualityThresholds().speed_jump)
    p.add_argument("--height-rate-threshold", type=float, default=QualityThresholds().height_rate)
    p.add_argument("--registry", default=None)
    p.add_argument("--banks", default=None)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("validate", help="check a package directory")
    p.add_argument("path")
    p.add_argument("--registry", default=None)
    p.add_argument("--banks", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="render figures and CSV for a package or batch")
    p.add_argument("path")
    p.add_argument("--out", default=None)
    p.add_argument("--sessions", action="store_true",
                   help="also render per-session figures for a batch directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KinescriptError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
