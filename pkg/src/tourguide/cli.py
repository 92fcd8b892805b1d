"""Command-line interface.

    tourguide validate --flow flow.tsv [--strict-questions]
    tourguide simulate --persona p.json [--flow ...] [--resources ...]
                       [--routes ...] [--seed N] [--cap 100] --report out.json
    tourguide simulate-pack [--dir personas/] [--out-dir reports/]
                            [--junit out.xml] [--seed N] [--cap 100]
    tourguide serve [--config config.json]

Flow, resources, routes, and personas default to the packaged tourist-guide
data. simulate-pack writes per-persona report JSON, summary.csv, and the
duration/coverage figures into --out-dir.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (
    default_flow_path,
    default_personas_dir,
    default_resources_dir,
    default_routes_path,
    load_config,
)
from .flow import parse_flow_sheet
from .report import render_figures, write_junit, write_summary_csv
from .resources import load_resources
from .routes import load_catalog
from .simulator import (
    DEFAULT_TURN_CAP,
    TEN_MINUTE_BUDGET_S,
    coverage_report,
    load_persona,
    load_persona_pack,
    longest_path_duration,
    run_persona,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="tourguide")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="compile a flow sheet and report diagnostics")
    p_validate.add_argument("--flow", type=Path, default=default_flow_path())
    p_validate.add_argument("--strict-questions", action="store_true",
                            help="require non-terminal utterances to end with ？/?")

    p_sim = sub.add_parser("simulate", help="run one persona and write its report")
    _add_data_args(p_sim)
    p_sim.add_argument("--persona", type=Path, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--cap", type=int, default=DEFAULT_TURN_CAP)
    p_sim.add_argument("--report", type=Path, default=None)

    p_pack = sub.add_parser("simulate-pack", help="run a persona directory and write reports")
    _add_data_args(p_pack)
    p_pack.add_argument("--dir", type=Path, default=default_personas_dir())
    p_pack.add_argument("--out-dir", type=Path, default=Path("sim-reports"))
    p_pack.add_argument("--junit", type=Path, default=None)
    p_pack.add_argument("--seed", type=int, default=0)
    p_pack.add_argument("--cap", type=int, default=DEFAULT_TURN_CAP)

    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("--config", type=Path, default=None)

    args = parser.parse_args(argv)
    if args.command == "validate":
        return _cmd_validate(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "simulate-pack":
        return _cmd_simulate_pack(args)
    if args.command == "serve":
        return _cmd_serve(args)
    parser.error(f"unknown command {args.command!r}")
    return 2


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--flow", type=Path, default=default_flow_path())
    p.add_argument("--resources", type=Path, default=default_resources_dir())
    p.add_argument("--routes", type=Path, default=default_routes_path())


def _compile(flow_path: Path, strict: bool = False):
    with open(flow_path, encoding="utf-8") as f:
        return parse_flow_sheet(f.read(), strict_question_lint=strict)


def _cmd_validate(args) -> int:
    result = _compile(args.flow, strict=args.strict_questions)
    for diagnostic in result.diagnostics:
        print(diagnostic, file=sys.stderr)
    if result.graph is None:
        print(f"FAIL: {len(result.diagnostics)} diagnostic(s)", file=sys.stderr)
        return 1
    graph = result.graph
    print(f"OK: {len(graph.states)} states, "
          f"{sum(len(n.transitions) for n in graph.states.values())} transitions, "
          f"initial={graph.initial_state}, "
          f"terminal={','.join(sorted(graph.terminal_states))}")
    return 0


def _cmd_simulate(args) -> int:
    result = _compile(args.flow)
    if result.graph is None:
        for diagnostic in result.diagnostics:
            print(diagnostic, file=sys.stderr)
        return 1
    resources = load_resources(args.resources)
    catalog = load_catalog(args.routes)
    persona = load_persona(args.persona)
    report = run_persona(result.graph, resources, persona, catalog=catalog,
                         turn_cap=args.cap, seed=args.seed)
    payload = report.to_json()
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    print(f"{persona.persona_id}: turns={report.turns} "
          f"duration={report.estimated_duration_s:.1f}s "
          f"ended_cleanly={report.ended_cleanly}", file=sys.stderr)
    return 0 if report.breakdown is None else 1


def _cmd_simulate_pack(args) -> int:
    result = _compile(args.flow)
    if result.graph is None:
        for diagnostic in result.diagnostics:
            print(diagnostic, file=sys.stderr)
        return 1
    graph = result.graph
    resources = load_resources(args.resources)
    catalog = load_catalog(args.routes)
    personas = load_persona_pack(args.dir)
    if not personas:
        print(f"no personas found in {args.dir}", file=sys.stderr)
        return 1

    reports = [
        run_persona(graph, resources, persona, catalog=catalog,
                    turn_cap=args.cap, seed=args.seed)
        for persona in personas
    ]
    coverage = coverage_report(reports, graph)
    longest = longest_path_duration(graph)

    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    for report in reports:
        (out_dir / f"{report.persona_id}.json").write_text(
            report.to_json() + "\n", encoding="utf-8")
    write_summary_csv(reports, out_dir / "summary.csv")
    render_figures(reports, graph, out_dir)
    (out_dir / "pack.json").write_text(json.dumps({
        "coverage": coverage.as_dict(),
        "longest_path_duration_s": longest,
        "personas": [r.persona_id for r in reports],
    }, ensure_ascii=False, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if args.junit:
        write_junit(reports, coverage, args.junit)

    breakdowns = [r for r in reports if r.breakdown]
    unclean = [r for r in reports if not r.ended_cleanly]
    print(f"personas={len(reports)} coverage={coverage.state_coverage:.2f} "
          f"longest_path={longest:.1f}s breakdowns={len(breakdowns)} "
          f"unclean={len(unclean)}")
    ok = (not breakdowns and coverage.state_coverage == 1.0
          and longest <= TEN_MINUTE_BUDGET_S)
    return 0 if ok else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_runtime, create_app

    config = load_config(args.config)
    runtime = build_runtime(config)
    if runtime.service is None:
        for diagnostic in runtime.boot_diagnostics:
            print(diagnostic, file=sys.stderr)
        print("refusing to serve a flow that failed validation", file=sys.stderr)
        return 1
    app = create_app(runtime)
    uvicorn.run(app, host=config.service.host, port=config.service.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
