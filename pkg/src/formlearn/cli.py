"""Command-line workflow: validate a project, train and evaluate models,
run scenarios, solve assignments, tune assignment weights, generate datasets
by observing a reference policy, and serve the HTTP API.

Exit codes: 0 success, 1 domain error or failed validation, 2 IO failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .assignment import (FACTORS, LinearWeightModel, PsoConfig, build_weights,
                         matching_score_fitness, pso_tune, scene_from_json, scripted_scenes,
                         solve_assignment)
from .errors import ArtifactError, FormlearnError, NotFoundError, ParseError, api_code
from .geometry import Point2, save_dataset
from .pipeline import PipelineConfig, TrainConfig, evaluate_columns, train_context
from .project import load_project, validate_project
from .simulator import (ScenarioConfig, observe_policy, plot_trace_svg, run_scenario,
                        save_trace_csv, save_trace_json, smoothness, uniform_ball_sampler)
from .synthetic import soccer_policy
from . import jsonio


def _parse_point(text: str) -> Point2:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParseError(f"expected 'x,y', got {text!r}")
    try:
        return Point2(float(parts[0]), float(parts[1]))
    except ValueError as e:
        raise ParseError(f"expected 'x,y', got {text!r}") from e


def _emit(obj, out: str | None) -> None:
    text = jsonio.canonical_dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    diags = validate_project(load_project(args.project))
    for msg in diags:
        print(msg)
    return 0 if not diags else 1


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        train=replace(TrainConfig(), max_epochs=args.max_epochs),
        n_hidden=args.hidden,
        seed=args.seed,
    )


def cmd_train(args) -> int:
    pb = load_project(args.project)
    d = pb.load_dataset()
    contexts = [args.context] if args.context else sorted(pb.graphs)
    if not contexts:
        raise NotFoundError("project declares no dependency graphs to train")
    cfg = _pipeline_config(args)
    for ctx in contexts:
        g = pb.load_graph(ctx)
        cm = train_context(d, g, cfg, context=ctx)
        pb.save_models(cm)
        for a in cm.graph.agent_ids():
            r = cm.reports[a]
            print(f"{ctx}/{a}: test E {r.test_E:.4f} m "
                  f"({r.epochs_run} epochs, {r.stop_reason})")
    return 0


def cmd_eval(args) -> int:
    pb = load_project(args.project)
    d = pb.load_dataset()
    cm = pb.load_models(args.context)
    idx = {
        "train": cm.split.train_idx,
        "val": cm.split.val_idx,
        "test": cm.split.test_idx,
        "all": tuple(range(d.n_columns)),
    }[args.split]
    res = evaluate_columns(cm, d, idx)
    for a, stats in res.per_agent.items():
        print(f"{args.context}/{a}: E {stats['E']:.4f} m  max {stats['max_error']:.4f} m")
    print(f"{args.context}/overall: E {res.overall['E']:.4f} m over {int(res.overall['n'])} points")
    if args.out:
        _emit({"per_agent": res.per_agent, "overall": res.overall}, args.out)
    return 0


def cmd_simulate(args) -> int:
    pb = load_project(args.project)
    if not pb.models:
        raise NotFoundError("no trained models in project; run train first")
    models = {ctx: pb.load_models(ctx) for ctx in pb.models}
    cs = pb.load_contexts()
    cfg = ScenarioConfig(
        cycles=args.cycles,
        ball_start=_parse_point(args.ball),
        ball_velocity=_parse_point(args.velocity),
        chase=args.chase,
        noise=args.noise,
        seed=args.seed,
    )
    tr = run_scenario(models, cs, cfg)
    if args.trace:
        save_trace_csv(args.trace, tr)
    if args.svg:
        plot_trace_svg(args.svg, tr, pb.load_dataset().field)
    if args.run:
        rel = f"trace_{args.run}.json"
        save_trace_json(pb.path(rel), tr)
        pb.register_trace(args.run, rel)
    last = tr.records[-1]
    print(f"{cfg.cycles} cycles, final context {last.context!r}, "
          f"ball at ({last.ball.x:.2f}, {last.ball.y:.2f})")
    if len(tr.records) >= 3:
        sm = smoothness(tr)
        print(f"direction change {sm.angle_mean:.2f} deg (std {sm.angle_std:.2f}), "
              f"distance/cycle {sm.dist_mean:.3f} m (std {sm.dist_std:.3f})")
    return 0


def cmd_assign(args) -> int:
    agents, positions, ball, goal, model = scene_from_json(jsonio.read_json(args.scene))
    w = build_weights(agents, positions, model, ball, goal)
    res = solve_assignment(w)
    _emit({
        "pairs": {agents[i].id: positions[j].id for i, j in enumerate(res.pairs)},
        "total": res.total,
    }, args.out)
    return 0


def cmd_pso(args) -> int:
    scenes = scripted_scenes(args.scenes, args.seed)
    fitness = matching_score_fitness(scenes)
    template = LinearWeightModel({name: 1.0 for name in FACTORS})
    cfg = PsoConfig(swarm=args.swarm, iterations=args.iterations,
                    bounds=((args.lo, args.hi),) * len(template.coefficients),
                    seed=args.seed)
    model = pso_tune(template, fitness, cfg)
    _emit({"coefficients": model.coefficients, "fitness": fitness(model)}, args.out)
    return 0


def cmd_observe(args) -> int:
    policy = soccer_policy(args.weight)
    d = observe_policy(policy, uniform_ball_sampler(), args.samples, args.seed)
    save_dataset(args.out, d)
    print(f"wrote {d.n_columns} observed snapshots to {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(load_project(args.project))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formlearn",
        description="Learn multi-agent formation strategy from demonstrations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("validate", cmd_validate, "check dataset, graphs and contexts of a project")
    p.add_argument("project")

    p = add("train", cmd_train, "train models for each context")
    p.add_argument("project")
    p.add_argument("--context", default=None)
    p.add_argument("--hidden", type=int, default=PipelineConfig().n_hidden)
    p.add_argument("--max-epochs", type=int, default=TrainConfig().max_epochs)

    p = add("eval", cmd_eval, "evaluate trained models on a dataset split")
    p.add_argument("project")
    p.add_argument("--context", default="default")
    p.add_argument("--split", choices=["train", "val", "test", "all"], default="test")
    p.add_argument("--out", default=None)

    p = add("simulate", cmd_simulate, "run a ball-following scenario")
    p.add_argument("project")
    p.add_argument("--cycles", type=int, default=200)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--chase", action="store_true")
    p.add_argument("--ball", default="0,0", help="ball start 'x,y'")
    p.add_argument("--velocity", default="2,1", help="initial ball velocity 'vx,vy'")
    p.add_argument("--trace", default=None, help="write CSV trace here")
    p.add_argument("--svg", default=None, help="write SVG figure here")
    p.add_argument("--run", default=None, help="store a JSON trace in the project under this name")

    p = add("assign", cmd_assign, "solve a position-assignment scene")
    p.add_argument("scene", help="scene JSON file")
    p.add_argument("--out", default=None)

    p = add("pso", cmd_pso, "tune assignment weights on scripted scenes")
    p.add_argument("--scenes", type=int, default=20)
    p.add_argument("--swarm", type=int, default=PsoConfig().swarm)
    p.add_argument("--iterations", type=int, default=PsoConfig().iterations)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=2.0)
    p.add_argument("--out", default=None)

    p = add("observe", cmd_observe, "generate a dataset by observing the reference policy")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--weight", type=float, default=None,
                   help="override the per-agent ball-attraction weights with one scalar")
    p.add_argument("--out", required=True)

    p = add("serve", cmd_serve, "serve the HTTP API for a project")
    p.add_argument("project")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ArtifactError as e:
        print(f"error [{api_code(e)}]: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error [io_error]: {e}", file=sys.stderr)
        return 2
    except FormlearnError as e:
        print(f"error [{api_code(e)}]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
