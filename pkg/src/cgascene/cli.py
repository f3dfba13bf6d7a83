"""Command-line entry points: serve, edit, bench."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench_harness import BenchConfig, load_cases, run_suite, write_charts
from .collision_resolver import ResolverConfig
from .edit_pipeline import PipelineConfig, execute_edit
from .errors import CgaSceneError, FixtureError
from .llm_gateway import HttpChatTransport, LlmConfig, MockTransport
from .scene_model import load_scene, save_scene


def _add_resolver_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--collision-budget", type=float, default=0.5,
                        help="collision repair time budget in seconds")
    parser.add_argument("--delta", type=float, default=None,
                        help="upward perturbation step (default: 5%% of object height)")
    parser.add_argument("--buffer", type=float, default=None,
                        help="spacing buffer (default: 2%% of scene diagonal)")
    parser.add_argument("--grid-res", type=float, default=None,
                        help="grid resolution (default: half the smallest extent)")


def _add_transport_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--transport", choices=("mock", "live"), default="mock")
    parser.add_argument("--mock-script", type=Path, default=None,
                        help="JSON/YAML mock script (required with --transport mock)")
    parser.add_argument("--llm-base-url", default="https://api.openai.com/v1")
    parser.add_argument("--llm-model", default="gpt-4-1106-preview")
    parser.add_argument("--llm-timeout", type=float, default=60.0)
    parser.add_argument("--llm-temperature", type=float, default=0.0)


def _resolver_from(args) -> ResolverConfig:
    return ResolverConfig(delta=args.delta, buffer=args.buffer,
                          grid_resolution=args.grid_res,
                          time_budget=args.collision_budget)


def _transport_from(args):
    if args.transport == "mock":
        if args.mock_script is None:
            raise SystemExit("--transport mock requires --mock-script")
        return MockTransport(args.mock_script)
    return HttpChatTransport(LlmConfig(
        base_url=args.llm_base_url, model=args.llm_model,
        temperature=args.llm_temperature, timeout=args.llm_timeout))


def _cmd_serve(args) -> int:
    import uvicorn

    from .service_api import ServiceConfig, create_app

    host, _, port = args.listen.rpartition(":")
    config = ServiceConfig(
        strategy_default=args.strategy_default,
        pipeline=PipelineConfig(strategy_default=args.strategy_default,
                                resolver=_resolver_from(args)),
        data_dir=args.data_dir,
        frontend_dir=args.frontend_dir,
    )
    app = create_app(transport=_transport_from(args), config=config)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def _cmd_edit(args) -> int:
    scene = load_scene(args.scene)
    cfg = PipelineConfig(strategy_default=args.strategy,
                         resolver=_resolver_from(args))
    new_scene, plan = execute_edit(scene, args.query, args.strategy,
                                   _transport_from(args), cfg)
    out = args.out or args.scene
    Path(out).write_bytes(save_scene(new_scene))
    if args.plan_out:
        Path(args.plan_out).write_text(json.dumps(plan.to_dict(), indent=2,
                                                  sort_keys=True), encoding="utf-8")
    print(f"edited {sorted({e.object_name for e in plan.entries})} -> {out}")
    return 0


def _cmd_bench_run(args) -> int:
    strategies = [s.strip() for s in args.strategy.split(",") if s.strip()]
    cases = load_cases(args.cases)
    cfg = BenchConfig.from_scene_dir(
        args.scenes, PipelineConfig(resolver=_resolver_from(args)))
    report = run_suite(strategies, cases, _transport_from(args), cfg)
    report.save(args.out)
    print(report.table_text())
    if args.charts:
        write_charts(report, args.charts)
        print(f"charts -> {args.charts}")
    print(f"report -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgascene",
        description="Instruction-driven 3D scene editing on CGA versors")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP/WebSocket service")
    serve.add_argument("--listen", default="127.0.0.1:8000")
    serve.add_argument("--data-dir", type=Path, default=None)
    serve.add_argument("--frontend-dir", type=Path, default=None,
                       help="built web UI to serve statically")
    serve.add_argument("--strategy-default", default="cga",
                       choices=("cga", "euclidean", "omniverse"))
    _add_transport_flags(serve)
    _add_resolver_flags(serve)
    serve.set_defaults(func=_cmd_serve)

    edit = sub.add_parser("edit", help="one-shot edit of a scene file")
    edit.add_argument("--scene", type=Path, required=True)
    edit.add_argument("--query", required=True)
    edit.add_argument("--out", type=Path, default=None,
                      help="output scene path (default: overwrite input)")
    edit.add_argument("--plan-out", type=Path, default=None)
    edit.add_argument("--strategy", default="cga",
                      choices=("cga", "euclidean", "omniverse"))
    _add_transport_flags(edit)
    _add_resolver_flags(edit)
    edit.set_defaults(func=_cmd_edit)

    bench = sub.add_parser("bench", help="benchmark harness")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    run = bench_sub.add_parser("run", help="run a case suite and report S/T")
    run.add_argument("--strategy", default="cga",
                     help="comma-separated list: cga,euclidean,omniverse")
    run.add_argument("--cases", type=Path, required=True)
    run.add_argument("--scenes", type=Path, required=True)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--charts", type=Path, default=None,
                     help="write grouped S/T bar charts (svg/png)")
    _add_transport_flags(run)
    _add_resolver_flags(run)
    run.set_defaults(func=_cmd_bench_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FixtureError as exc:
        print(f"fixture error: {exc}", file=sys.stderr)
        return 2
    except CgaSceneError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
