"""Command-line entry points.

Subcommands:
  plan           solve a domain/problem file pair, print the step sequence
  run            headless scripted sessions; writes metrics CSV/JSON + run logs
  bench-motion   per-seed base-planner cost table (CSV)
  pour-batch     pouring error statistics over seeds
  serve          start the HTTP gateway
  ui-fixture     export a replayable event fixture for front-end tests
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np


def _add_scenario_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--scenario",
        default=None,
        help="scenario JSON (defaults to the packaged standard scenario)",
    )


def _load_scenario(args):
    from ..scenario import load_default_scenario, load_scenario

    if args.scenario is None:
        return load_default_scenario()
    path = Path(args.scenario)
    if not path.exists():
        print(f"error: scenario file not found: {path}", file=sys.stderr)
        raise SystemExit(2)
    return load_scenario(path)


def cmd_plan(args) -> int:
    from ..planner import BudgetExhausted, NoPlanFound, parse
    from ..planner.search import plan as find_plan

    domain_text = Path(args.domain).read_text()
    problem_text = Path(args.problem).read_text()
    domain, problem = parse(domain_text, problem_text)
    try:
        result = find_plan(problem, budget=args.budget)
    except NoPlanFound:
        print("no plan exists", file=sys.stderr)
        return 1
    except BudgetExhausted:
        print("search budget exhausted before finding a plan", file=sys.stderr)
        return 1
    for line in result.as_lines():
        print(line)
    if args.json:
        payload = {
            "domain": domain.name,
            "problem": problem.name,
            "steps": [{"action": s.name, "args": list(s.args)} for s in result.steps],
            "cost": result.cost,
        }
        Path(args.json).write_text(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_run(args) -> int:
    from ..evaluation import (
        aggregate,
        format_mean_std,
        metrics,
        write_metrics_csv,
        write_metrics_json,
        write_run_logs,
    )
    from ..menu import GoalSpecError
    from ..runner import RunConfig, RunnerError, run_batch

    scenario = _load_scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = RunConfig(
        goal_spec=args.goal,
        error_rate=args.error_rate,
        seed=args.seed,
        step_interval=args.step_interval,
        simulated_motion=args.simulated_motion,
        matrix_path=args.matrix,
    )
    try:
        results = run_batch(scenario, config, args.runs)
    except (GoalSpecError, RunnerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    run_metrics = [metrics(r.log) for r in results]
    write_metrics_csv(out / "metrics.csv", run_metrics)
    write_metrics_json(
        out / "metrics.json",
        run_metrics,
        extra={
            "goal": args.goal,
            "error_rate": args.error_rate,
            "seed": args.seed,
            "runs": args.runs,
            "statuses": sorted(r.log.meta["status"] for r in results),
            "channel_accuracy_mean": float(np.mean([r.log.channel_accuracy() for r in results])),
        },
    )
    write_run_logs(out / "runs.ndjson", [r.log for r in results])

    # Table-style per-action aggregate over all runs
    from ..mission import action_table

    rows = action_table([r.session for r in results if r.session is not None])
    with open(out / "actions.csv", "w", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(
            ["action", "executed", "scheduled", "success_pct", "runtime_mean", "runtime_std"]
        )
        for row in rows:
            writer.writerow(
                [
                    row["action"],
                    row["executed"],
                    row["scheduled"],
                    f"{row['success_pct']:.2f}",
                    f"{row['runtime_mean']:.2f}",
                    f"{row['runtime_std']:.2f}",
                ]
            )

    agg = aggregate(run_metrics)
    for name, (mean, std) in agg.items():
        print(f"{name}: {format_mean_std(mean, std, 3)}")
    print("action  executed(scheduled)  success%  runtime mean±std [s]")
    for row in rows:
        print(
            f"{row['action']:<9}{row['executed']} ({row['scheduled']})"
            f"{row['success_pct']:>10.1f}"
            f"{row['runtime_mean']:>10.2f}±{row['runtime_std']:.2f}"
        )
    return 0


def cmd_bench_motion(args) -> int:
    import csv

    from ..motion.geometry import Disc, Pose2D, Workspace
    from ..motion.rrt import NoSolutionFound, bi2rrt_star

    rows = []
    for seed in range(args.seeds):
        if args.world == "empty":
            ws = Workspace(bounds=(-1.0, -3.0, 7.0, 3.0))
        else:
            rng = np.random.default_rng(10_000 + seed)
            obstacles = []
            for _ in range(6):
                c = (rng.uniform(0.8, 4.2), rng.uniform(-2.0, 2.0))
                r = rng.uniform(0.3, 0.6)
                if np.hypot(*c) > r + 0.35 and np.hypot(c[0] - 5.0, c[1]) > r + 0.35:
                    obstacles.append(Disc(center=c, radius=r))
            ws = Workspace(bounds=(-1.0, -3.0, 7.0, 3.0), obstacles=tuple(obstacles))
        try:
            res = bi2rrt_star(
                Pose2D(0, 0, 0),
                Pose2D(5, 0, 0),
                ws,
                budget=args.budget,
                rng=np.random.default_rng(seed),
            )
            rows.append((seed, res.cost, res.final_cost, res.iterations_to_first))
        except NoSolutionFound:
            rows.append((seed, "", "", ""))

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "first_cost", "final_cost", "iterations_to_first"])
        for seed, first, final, iters in rows:
            writer.writerow(
                [
                    seed,
                    f"{first:.6f}" if first != "" else "",
                    f"{final:.6f}" if final != "" else "",
                    iters,
                ]
            )
    solved = sum(1 for r in rows if r[1] != "")
    print(f"solved {solved}/{args.seeds}; wrote {args.out}")
    return 0


def cmd_pour_batch(args) -> int:
    from ..liquid import CupModel, pour_session

    scenario = _load_scenario(args)
    cfg = scenario.pour
    cup = CupModel(interior_height=cfg.interior_height, fill_target=cfg.fill_target)
    occlusion = None
    if args.occlusion:
        crossing = cfg.fill_target / cfg.flow_rate
        occlusion = (0.6 * crossing, 1.5 * crossing)
    errors = []
    for seed in range(args.seeds):
        res = pour_session(
            cup,
            flow_rate=cfg.flow_rate,
            sensor_noise=args.noise if args.noise is not None else cfg.sensor_noise_std,
            seed=seed,
            timestep=cfg.timestep,
            view_angle=cfg.view_angle,
            stop_latency=cfg.stop_latency,
            occlusion=occlusion,
        )
        errors.append(res.error_mm)
    errors = np.asarray(errors)
    print(f"runs: {args.seeds}")
    print(f"level error: {errors.mean():.1f}±{errors.std():.1f} mm")
    print(f"|error| mean: {np.abs(errors).mean():.1f} mm")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("seed,error_mm\n")
            for i, e in enumerate(errors):
                fh.write(f"{i},{e:.4f}\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    scenario = _load_scenario(args)
    app = create_app(
        scenario, error_rate=args.error_rate, seed=args.seed, time_scale=args.time_scale
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_ui_fixture(args) -> int:
    """Replay a scripted session through the gateway app; dump events + snapshots."""
    from fastapi.testclient import TestClient

    from ..runner import ScenarioRuntime
    from .server import create_app

    scenario = _load_scenario(args)
    app = create_app(scenario, error_rate=0.0, seed=args.seed, time_scale=0.0)
    client = TestClient(app)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    (out / "world_before.json").write_text(
        json.dumps(client.get("/world").json(), indent=2, sort_keys=True)
    )
    sid = client.post("/session", json={}).json()["session"]
    runtime = ScenarioRuntime(scenario)
    world_state = app.state.world.snapshot()
    ctx = runtime.menu_context(world_state)
    from ..menu import parse_goal_spec

    target = parse_goal_spec(args.goal, ctx)
    policy = runtime.policy(ctx, target)

    # walk the instructed path, then confirm every action
    for cmd in policy.instructed_path():
        client.post(f"/command/{sid}", json={"command": cmd.value})
    status = client.get(f"/session/{sid}").json()
    guard = 0
    while status.get("status") not in ("done", "aborted") and guard < 200:
        client.post(f"/command/{sid}", json={"command": "select"})
        status = client.get(f"/session/{sid}").json()
        guard += 1

    events = []
    with client.stream("GET", "/events", params={"after": 0, "idle_timeout": 0.2}) as resp:
        for line in resp.iter_lines():
            if line:
                events.append(json.loads(line))
    (out / "events.ndjson").write_text(
        "\n".join(json.dumps(e, sort_keys=True) for e in events) + "\n"
    )
    (out / "world.json").write_text(json.dumps(client.get("/world").json(), indent=2, sort_keys=True))
    (out / "session.json").write_text(json.dumps(status, indent=2, sort_keys=True))
    (out / "menu.json").write_text(
        json.dumps(client.get(f"/menu/{sid}").json(), indent=2, sort_keys=True)
    )
    print(f"wrote fixture with {len(events)} events to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcibot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve a PDDL-subset domain/problem pair")
    p.add_argument("domain")
    p.add_argument("problem")
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--json", help="also write the plan as JSON to this path")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="headless scripted closed-loop sessions")
    _add_scenario_arg(p)
    p.add_argument("--goal", required=True, help='e.g. "put cup1 table"')
    p.add_argument("--error-rate", type=float, default=0.0)
    p.add_argument("--matrix", default=None, help="confusion matrix JSON (overrides --error-rate)")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step-interval", type=float, default=9.0)
    p.add_argument("--simulated-motion", action="store_true")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench-motion", help="base planner cost benchmark")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--budget", type=int, default=1200)
    p.add_argument("--world", choices=("empty", "random"), default="random")
    p.add_argument("--out", default="bench_motion.csv")
    p.set_defaults(func=cmd_bench_motion)

    p = sub.add_parser("pour-batch", help="pouring stop-signal error statistics")
    _add_scenario_arg(p)
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--occlusion", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pour_batch)

    p = sub.add_parser("serve", help="start the HTTP gateway")
    _add_scenario_arg(p)
    p.add_argument("--host", default=os.environ.get("BCIBOT_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("BCIBOT_PORT", "8000")))
    p.add_argument("--error-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-scale", type=float, default=0.02)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("ui-fixture", help="export a replayable front-end fixture")
    _add_scenario_arg(p)
    p.add_argument("--goal", default="put cup1 table")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="frontend/fixtures")
    p.set_defaults(func=cmd_ui_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
