"""Synthetic fixtures with known generating rules.

Two families: a small ball -> leader -> follower chain whose closed forms act
as oracles for pipeline training, and an 11-agent soccer-like team (graph,
context set, home positions, parametric policy) sized like a real
demonstration project.
"""
from __future__ import annotations

import numpy as np

from .contexts import ContextSet, TransitionRule
from .depgraph import DependencyGraph, GraphNode
from .geometry import Dataset, FieldConfig, Point2, Snapshot, coordinate_rows


def chain_graph() -> DependencyGraph:
    """ball -> L -> F; the follower sees only the leader."""
    return DependencyGraph(
        nodes=[
            GraphNode("ball", "feature", ("ball_x", "ball_y")),
            GraphNode("L", "agent", coordinate_rows("L")),
            GraphNode("F", "agent", coordinate_rows("F")),
        ],
        edges=[("ball", "L"), ("L", "F")],
    )


def _chain_dataset(bx, by, lx, ly, fx, fy, field: FieldConfig) -> Dataset:
    snaps = [
        Snapshot([float(bx[i]), float(by[i])],
                 [Point2(float(lx[i]), float(ly[i])), Point2(float(fx[i]), float(fy[i]))])
        for i in range(len(bx))
    ]
    d = Dataset(field, ["ball_x", "ball_y"], ["L", "F"], snaps)
    d.validate()
    return d


def linear_chain_dataset(n: int, seed: int = 0, slope: float = 0.5,
                         offset: tuple[float, float] = (0.0, 5.0),
                         target_noise: float = 0.0,
                         field: FieldConfig = FieldConfig()) -> Dataset:
    """L = slope * ball, F = L + offset, plus optional Gaussian target noise."""
    rng = np.random.default_rng(seed)
    bx = rng.uniform(-field.length / 2, field.length / 2, n)
    by = rng.uniform(-field.width / 2, field.width / 2, n)
    lx, ly = slope * bx, slope * by
    fx, fy = lx + offset[0], ly + offset[1]
    if target_noise > 0:
        lx = lx + rng.normal(0.0, target_noise, n)
        ly = ly + rng.normal(0.0, target_noise, n)
        fx = fx + rng.normal(0.0, target_noise, n)
        fy = fy + rng.normal(0.0, target_noise, n)
    return _chain_dataset(bx, by, lx, ly, fx, fy, field)


def wavy_chain_dataset(n: int, seed: int = 0, amp: float = 4.0,
                       target_noise: float = 0.0,
                       field: FieldConfig = FieldConfig()) -> Dataset:
    """Nonlinear chain: the leader follows the ball along bent curves, the
    follower shadows the leader with a wavy offset."""
    rng = np.random.default_rng(seed)
    bx = rng.uniform(-field.length / 2, field.length / 2, n)
    by = rng.uniform(-field.width / 2, field.width / 2, n)
    lx = 0.5 * bx + amp * np.sin(bx / 8.0)
    ly = 0.4 * by + amp * np.cos(bx / 10.0)
    fx = lx + 3.0 * np.sin(ly / 5.0)
    fy = ly + 5.0 + 2.0 * np.cos(lx / 7.0)
    if target_noise > 0:
        lx = lx + rng.normal(0.0, target_noise, n)
        ly = ly + rng.normal(0.0, target_noise, n)
        fx = fx + rng.normal(0.0, target_noise, n)
        fy = fy + rng.normal(0.0, target_noise, n)
    return _chain_dataset(bx, by, lx, ly, fx, fy, field)


# 11-agent team: goalkeeper a1, back line a2-a5, midfield a6-a8, front a9-a11.
# Each line depends on the ball and on the line behind it.
_SOCCER_GROUPS = (("a1",), ("a2", "a3", "a4", "a5"), ("a6", "a7", "a8"), ("a9", "a10", "a11"))

SOCCER_AGENTS = tuple(a for group in _SOCCER_GROUPS for a in group)

SOCCER_HOMES: dict[str, Point2] = {
    "a1": Point2(-48.0, 0.0),
    "a2": Point2(-35.0, -20.0), "a3": Point2(-35.0, -7.0),
    "a4": Point2(-35.0, 7.0), "a5": Point2(-35.0, 20.0),
    "a6": Point2(-10.0, -15.0), "a7": Point2(-10.0, 0.0), "a8": Point2(-10.0, 15.0),
    "a9": Point2(15.0, -12.0), "a10": Point2(15.0, 0.0), "a11": Point2(15.0, 12.0),
}

SOCCER_WEIGHTS: dict[str, float] = {
    "a1": 0.08,
    "a2": 0.22, "a3": 0.22, "a4": 0.22, "a5": 0.22,
    "a6": 0.4, "a7": 0.4, "a8": 0.4,
    "a9": 0.6, "a10": 0.6, "a11": 0.6,
}


def soccer_graph() -> DependencyGraph:
    nodes = [GraphNode("ball", "feature", ("ball_x", "ball_y"))]
    nodes += [GraphNode(a, "agent", coordinate_rows(a)) for a in SOCCER_AGENTS]
    edges = [("ball", a) for a in SOCCER_AGENTS]
    for src_group, dst_group in zip(_SOCCER_GROUPS, _SOCCER_GROUPS[1:]):
        edges += [(s, t) for s in src_group for t in dst_group]
    return DependencyGraph(nodes, edges)


def soccer_policy(weights=None):
    """Parametric reference positioning over the standard homes; ``weights``
    may be a scalar, a per-agent mapping, or None for the standard table."""
    from .simulator import ParametricFormationPolicy
    if weights is None:
        weights = dict(SOCCER_WEIGHTS)
    return ParametricFormationPolicy(dict(SOCCER_HOMES), weights)


def soccer_dataset(n: int = 955, seed: int = 0,
                   field: FieldConfig = FieldConfig()) -> Dataset:
    from .simulator import observe_policy, uniform_ball_sampler
    return observe_policy(soccer_policy(), uniform_ball_sampler(field), n, seed, field)


SOCCER_CONTEXTS = ("Attack", "Defense", "Mark", "Run Away", "Dead Balls")


def soccer_context_set() -> ContextSet:
    """Five contexts gated on ball position: end zones freeze play, each half
    picks a posture, and the middle band splits on the ball's side of the
    field."""
    def f(op, feature, **kw):
        return {"op": op, "feature": feature, **kw}

    dead = {"op": "or", "args": [f("lt", "ball_x", value=-48.0), f("gt", "ball_x", value=48.0)]}
    attack = {"op": "and", "args": [f("gt", "ball_x", value=10.0), f("le", "ball_x", value=48.0)]}
    defense = {"op": "and", "args": [f("lt", "ball_x", value=-10.0), f("ge", "ball_x", value=-48.0)]}
    mid = f("between", "ball_x", lo=-10.0, hi=10.0)
    mark = {"op": "and", "args": [mid, f("le", "ball_y", value=0.0)]}
    run_away = {"op": "and", "args": [mid, f("gt", "ball_y", value=0.0)]}
    by_target = {"Dead Balls": (3, dead), "Attack": (2, attack), "Defense": (2, defense),
                 "Mark": (1, mark), "Run Away": (1, run_away)}
    rules = [
        TransitionRule(src, dst, priority, when)
        for src in SOCCER_CONTEXTS
        for dst, (priority, when) in by_target.items()
        if src != dst
    ]
    cs = ContextSet(list(SOCCER_CONTEXTS), "Defense", rules)
    cs.validate()
    return cs
