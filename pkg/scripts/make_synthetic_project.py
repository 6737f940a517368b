#!/usr/bin/env python3
"""Create a ready-to-train project directory from one of the built-in
synthetic datasets. Handy for demos and for feeding the HTTP service.

    python3 scripts/make_synthetic_project.py out/demo --kind wavy --snapshots 800
    formlearn train out/demo
    formlearn serve out/demo
"""
import argparse

from formlearn.project import init_project
from formlearn.synthetic import (
    chain_graph,
    linear_chain_dataset,
    soccer_context_set,
    soccer_dataset,
    soccer_graph,
    wavy_chain_dataset,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("root", help="project directory to create")
    ap.add_argument("--kind", choices=["linear", "wavy", "soccer"], default="wavy")
    ap.add_argument("--snapshots", type=int, default=800)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if args.kind == "linear":
        d, g, cs = linear_chain_dataset(args.snapshots, seed=args.seed), chain_graph(), None
    elif args.kind == "wavy":
        d, g, cs = wavy_chain_dataset(args.snapshots, seed=args.seed), chain_graph(), None
    else:
        d = soccer_dataset(args.snapshots, seed=args.seed)
        g, cs = soccer_graph(), soccer_context_set()

    contexts = {c: g for c in cs.contexts} if cs is not None else {"default": g}
    pb = init_project(args.root, d, cs, contexts)
    print(f"{args.kind} project at {pb.root}: {d.n_columns} snapshots, "
          f"{len(d.agent_rows)} agents, graphs: {sorted(pb.graphs)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
