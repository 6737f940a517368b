"""Top-level acceptance gates, one test per criterion.

The first docstring line of each test is echoed as a PASS/FAIL line in the
terminal summary (see conftest), so keep those lines self-contained.
"""
import itertools
import math
import time

import numpy as np
import pytest

from formlearn.assignment import PsoConfig, pso_maximize, solve_assignment
from formlearn.contexts import ContextSet, step_context
from formlearn.depgraph import DependencyGraph, GraphNode, training_order
from formlearn.errors import GraphError
from formlearn.geometry import Point2, coordinate_rows
from formlearn.mlp import (
    MlpSpec,
    TrainConfig,
    _forward_normalized,
    init_params,
    lm_step,
    metric_E,
    metric_max_error,
    metric_SSE,
    model_jacobian,
    train,
)
from formlearn.geometry import split_indices
from formlearn.pipeline import PipelineConfig, evaluate_columns, train_context
from formlearn.simulator import ScenarioConfig, robustness_sweep, run_scenario, trace_to_csv, trace_to_json
from formlearn.synthetic import (
    chain_graph,
    linear_chain_dataset,
    soccer_context_set,
    soccer_dataset,
    soccer_graph,
    wavy_chain_dataset,
)


@pytest.fixture(scope="module")
def wavy_sweep():
    """Chain models trained on 800 wavy snapshots at several hidden sizes."""
    d = wavy_chain_dataset(800, seed=0)
    g = chain_graph()
    out = {}
    for h in (4, 8, 16, 36):
        t0 = time.perf_counter()
        cm = train_context(d, g, PipelineConfig(n_hidden=h, seed=0))
        elapsed = time.perf_counter() - t0
        res = evaluate_columns(cm, d, cm.split.test_idx)
        out[h] = (cm, res, elapsed)
    return d, out


def test_assignment_optimality():
    """Matching solver equals exhaustive search on 200 random 6x8 matrices within 5 seconds."""
    perms = np.array(list(itertools.permutations(range(8), 6)))
    rows = np.arange(6)
    t0 = time.perf_counter()
    for trial in range(200):
        rng = np.random.default_rng(trial)
        w = rng.uniform(-10.0, 10.0, (6, 8))
        totals = w[rows, perms].sum(axis=1)
        mx = totals.max()
        best_pairs = min(map(tuple, perms[totals == mx]))
        a = solve_assignment(w)
        assert a.pairs == best_pairs
        assert a.total == float(sum(w[i, j] for i, j in enumerate(best_pairs)))
    assert time.perf_counter() - t0 < 5.0


def test_metric_oracles_and_rms_bound():
    """Error metrics match direct oracles to 1e-12 and mean error never exceeds the RMS bound on 1000 random point sets."""
    rng = np.random.default_rng(17)
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        t = rng.uniform(-60, 60, (n, 2))
        p = rng.uniform(-60, 60, (n, 2))
        dists = [math.hypot(a - c, b - d) for (a, b), (c, d) in zip(t, p)]
        e = metric_E(t, p)
        sse = metric_SSE(t, p)
        assert math.isclose(e, sum(dists) / n, rel_tol=1e-12, abs_tol=1e-12)
        assert math.isclose(sse, sum(x * x for x in dists), rel_tol=1e-12, abs_tol=1e-12)
        assert math.isclose(metric_max_error(t, p), max(dists), rel_tol=1e-12, abs_tol=1e-12)
        assert e <= math.sqrt(sse / n)


def test_levenberg_marquardt_correctness():
    """Analytic jacobian matches central differences to 1e-4, the undamped step solves the normal equations to 1e-6, and accepted steps never raise the training error."""
    spec = MlpSpec(2, 36)
    rng = np.random.default_rng(0)
    theta = init_params(spec, rng)
    xn = rng.uniform(-1.0, 1.0, (4, 2))
    jac = model_jacobian(theta, spec, xn)
    h = 1e-6
    fd = np.empty_like(jac)
    for k in range(spec.n_params):
        bump = np.zeros(spec.n_params)
        bump[k] = h
        yp, _ = _forward_normalized(theta + bump, spec, xn)
        ym, _ = _forward_normalized(theta - bump, spec, xn)
        fd[:, k] = ((yp - ym) / (2.0 * h)).ravel()
    assert np.max(np.abs(jac - fd) / np.maximum(np.abs(fd), 1.0)) < 1e-4

    jlin = rng.normal(size=(60, 8))
    resid = rng.normal(size=60)
    expected, *_ = np.linalg.lstsq(jlin, resid, rcond=None)
    assert np.max(np.abs(lm_step(jlin, resid, 0.0) - expected)) < 1e-6

    X = rng.uniform(-20, 20, (150, 2))
    Y = np.column_stack([np.sin(X[:, 0] / 5.0), X[:, 1] * 0.4]) + rng.normal(0, 0.3, (150, 2))
    _, report = train(MlpSpec(2, 8), X, Y, split_indices(150, seed=1),
                      TrainConfig(max_epochs=60, seed=2))
    assert all(b < a for a, b in zip(report.train_sse, report.train_sse[1:]))


def test_synthetic_pipeline_fidelity(wavy_sweep):
    """Chain trained on 800 snapshots reaches per-agent test error under 0.1 m in under 60 s, and error over hidden sizes 4/8/16/36 is non-increasing until it plateaus below 0.1 m."""
    _, sweep = wavy_sweep
    cm, res, elapsed = sweep[36]
    assert len(cm.split.train_idx) == 560
    assert len(cm.split.val_idx) == 80
    assert len(cm.split.test_idx) == 160
    for a in ("L", "F"):
        assert cm.reports[a].test_E < 0.1
        assert res.per_agent[a]["E"] < 0.1
    assert elapsed < 60.0

    curve = [sweep[h][1].overall["E"] for h in (4, 8, 16, 36)]
    plateau = 0.1
    for e0, e1 in zip(curve, curve[1:]):
        assert e1 <= e0 or (e0 < plateau and e1 < plateau)


def test_propagation_ablation():
    """With a crippled upstream agent, training downstream agents on propagated estimates yields mean execution error no worse than training on demonstrations, over 10 seeds."""
    g = chain_graph()
    withp, withoutp = [], []
    for s in range(10):
        d = wavy_chain_dataset(400, seed=100 + s)
        base = dict(train=TrainConfig(max_epochs=120), n_hidden=12,
                    hidden_overrides={"L": 1}, seed=s)
        cm1 = train_context(d, g, PipelineConfig(**base, propagate_estimates=True))
        cm0 = train_context(d, g, PipelineConfig(**base, propagate_estimates=False))
        withp.append(evaluate_columns(cm1, d, cm1.split.test_idx).per_agent["F"]["E"])
        withoutp.append(evaluate_columns(cm0, d, cm0.split.test_idx).per_agent["F"]["E"])
    assert np.mean(withp) <= np.mean(withoutp)


def test_learning_from_observation():
    """Models trained on 1000 observed snapshots of the 11-agent reference policy reach test error under 0.05 m in under 120 s."""
    d = soccer_dataset(1000, seed=0)
    assert len(d.agent_rows) == 11
    t0 = time.perf_counter()
    cm = train_context(d, soccer_graph(), PipelineConfig(seed=0))
    elapsed = time.perf_counter() - t0
    res = evaluate_columns(cm, d, cm.split.test_idx)
    assert res.overall["E"] < 0.05
    assert max(s["E"] for s in res.per_agent.values()) < 0.05
    assert elapsed < 120.0


def test_simulator_determinism_and_physics(chain_setup):
    """Identical seeds reproduce traces byte for byte, per-cycle displacement never exceeds the speed cap, and agents come to rest on a static ball."""
    _, cm = chain_setup
    cfg = ScenarioConfig(cycles=120, ball_velocity=Point2(1.2, -0.7), noise=0.25,
                         chase=True, seed=13)
    t1 = run_scenario(cm, None, cfg)
    t2 = run_scenario(cm, None, cfg)
    assert trace_to_csv(t1) == trace_to_csv(t2)
    assert trace_to_json(t1) == trace_to_json(t2)
    for a in t1.agent_ids:
        assert max(t1.displacements(a)) <= cfg.max_speed + 1e-9

    static = run_scenario(cm, None, ScenarioConfig(cycles=250, ball_start=Point2(8.0, -4.0)),
                          start={"L": Point2(-50.0, 30.0), "F": Point2(50.0, -30.0)})
    last = static.records[-1]
    for a in static.agent_ids:
        assert static.displacements(a)[-1] == 0.0
        assert last.actual[a] == last.targets[a]


def test_noise_robustness():
    """Mean test error is non-decreasing across perception noise levels 0 to 0.6 m and grows at most 25 percent, averaged over 20 seeds."""
    g = chain_graph()
    stddevs = [0.0, 0.15, 0.3, 0.45, 0.6]
    per_seed = []
    for s in range(20):
        d = linear_chain_dataset(400, seed=200 + s, slope=0.45, target_noise=0.5)
        cfg = PipelineConfig(train=TrainConfig(max_epochs=150), n_hidden=8, seed=s)
        cm = train_context(d, g, cfg)
        rows = robustness_sweep(cm, d, cm.split.test_idx, stddevs, seed=s)
        assert [r.stddev for r in rows] == stddevs
        if s == 0:
            plain = evaluate_columns(cm, d, cm.split.test_idx)
            assert rows[0].E == plain.overall["E"]  # zero noise is the plain path
        per_seed.append([r.E for r in rows])
    means = np.mean(per_seed, axis=0)
    assert all(b >= a for a, b in zip(means, means[1:]))
    assert means[-1] <= 1.25 * means[0]


def _random_agent_dag(rng):
    k = int(rng.integers(1, 12))
    names = [f"a{i}" for i in range(k)]
    perm = rng.permutation(k)
    nodes = [GraphNode("ball", "feature", ("ball_x", "ball_y"))]
    nodes += [GraphNode(n, "agent", coordinate_rows(n)) for n in names]
    edges, agent_edges = [], []
    for i in range(k):
        for j in range(i + 1, k):
            if rng.random() < 0.3:
                e = (names[perm[i]], names[perm[j]])
                edges.append(e)
                agent_edges.append(e)
    fed = {t for _, t in edges}
    edges += [("ball", n) for n in names if n not in fed]
    return DependencyGraph(nodes=nodes, edges=edges), names, agent_edges


def _reachable(agent_edges, names):
    adj = {n: set() for n in names}
    for u, v in agent_edges:
        adj[u].add(v)
    reach = {}
    for n in names:
        seen, stack = set(), [n]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        reach[n] = seen
    return reach


def test_dependency_graph_laws():
    """Training order respects reachability on 200 random graphs of up to 12 nodes and every injected cycle is detected."""
    for trial in range(200):
        rng = np.random.default_rng(1000 + trial)
        g, names, agent_edges = _random_agent_dag(rng)
        order = training_order(g)
        assert sorted(order) == sorted(names)
        pos = {a: i for i, a in enumerate(order)}
        reach = _reachable(agent_edges, names)
        for u in names:
            for v in reach[u]:
                assert pos[u] < pos[v]

        if agent_edges:
            u, v = agent_edges[int(rng.integers(len(agent_edges)))]
            bad_edges = list(g.edges) + [(v, u)]
        else:
            bad_edges = list(g.edges) + [(names[0], names[0])]
        cyclic = DependencyGraph(nodes=g.nodes, edges=bad_edges)
        with pytest.raises(GraphError):
            training_order(cyclic)


def test_context_engine_invariants():
    """Exactly one context is active per cycle, 10000 steps replay deterministically, and an empty rule set never leaves the initial context."""
    cs = soccer_context_set()
    rng = np.random.default_rng(3)
    balls = rng.uniform([-52.5, -34.0], [52.5, 34.0], (10000, 2))

    def replay():
        active = cs.initial
        seq = []
        for bx, by in balls:
            active = step_context(cs, active, {"ball_x": bx, "ball_y": by})
            assert isinstance(active, str) and active in cs.contexts
            seq.append(active)
        return seq

    s1, s2 = replay(), replay()
    assert s1 == s2
    assert len(set(s1)) >= 3  # the stream actually exercises transitions

    quiet = ContextSet(contexts=["Solo"], initial="Solo", rules=[])
    active = quiet.initial
    for bx, by in balls[:1000]:
        active = step_context(quiet, active, {"ball_x": bx, "ball_y": by})
        assert active == "Solo"


def test_swarm_tuner_sanity():
    """The particle swarm lands within 0.05 of the sphere optimum in 100 iterations for 10 of 10 seeds."""
    target = np.array([0.2, -0.35, 0.45])
    for seed in range(10):
        cfg = PsoConfig(bounds=((-1.0, 1.0),) * 3, iterations=100, seed=seed)
        best, _ = pso_maximize(lambda x: -float(((x - target) ** 2).sum()), cfg)
        assert np.linalg.norm(best - target) < 0.05
