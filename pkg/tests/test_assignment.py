"""Position matching, weight factors, and the swarm tuner."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formlearn.assignment import (
    DEFAULT_WEIGHTS,
    FACTORS,
    AgentState,
    CandidatePosition,
    LinearWeightModel,
    PsoConfig,
    build_weights,
    matching_score_fitness,
    pso_maximize,
    pso_tune,
    scene_from_json,
    scripted_scenes,
    solve_assignment,
)
from formlearn.errors import InvariantViolation, ParseError
from formlearn.geometry import Point2


def brute_force_best(w):
    """Exhaustive maximum-weight matching; ties broken lexicographically."""
    n, k = w.shape
    best = -math.inf
    best_pairs = None
    for perm in itertools.permutations(range(k), n):
        tot = sum(w[i, j] for i, j in enumerate(perm))
        if tot > best or (tot == best and perm < best_pairs):
            best, best_pairs = tot, perm
    return best_pairs, best


def test_square_hand_case():
    w = np.array([[1.0, 2.0], [3.0, 1.0]])
    a = solve_assignment(w)
    assert a.pairs == (1, 0)
    assert a.total == 5.0
    assert a.as_dict() == {0: 1, 1: 0}


def test_constant_matrix_breaks_ties_lexicographically():
    a = solve_assignment(np.ones((3, 4)))
    assert a.pairs == (0, 1, 2)
    assert a.total == 3.0


def test_surplus_positions_stay_unused():
    w = np.array([[0.0, 0.0, 10.0], [0.0, 9.0, 8.0]])
    a = solve_assignment(w)
    assert a.pairs == (2, 1)
    assert a.total == 19.0


def test_additive_shift_leaves_pairs_unchanged():
    rng = np.random.default_rng(5)
    w = rng.uniform(-10, 10, (4, 6))
    a = solve_assignment(w)
    b = solve_assignment(w + 7.5)
    assert a.pairs == b.pairs
    assert b.total == pytest.approx(a.total + 4 * 7.5)


@pytest.mark.parametrize("w,msg", [
    (np.zeros(4), "2-D"),
    (np.zeros((0, 3)), "no agents"),
    (np.zeros((3, 2)), "at least as many positions"),
    (np.array([[1.0, math.inf]]), "non-finite"),
])
def test_solver_input_validation(w, msg):
    with pytest.raises(InvariantViolation, match=msg):
        solve_assignment(w)


@st.composite
def weight_matrices(draw):
    n = draw(st.integers(1, 4))
    k = draw(st.integers(n, 5))
    vals = draw(st.lists(st.integers(-10, 10), min_size=n * k, max_size=n * k))
    return np.array(vals, dtype=float).reshape(n, k)


@settings(max_examples=120)
@given(weight_matrices())
def test_solver_matches_exhaustive_search(w):
    # Integer-valued entries make total comparisons and ties exact.
    pairs, total = brute_force_best(w)
    a = solve_assignment(w)
    assert a.total == total
    assert a.pairs == pairs


@pytest.mark.parametrize("name,expected", [
    ("agent_position_distance", -5.0),
    ("position_goal_distance", -math.sqrt(65.0)),
    ("position_ball_distance", -math.sqrt(18.0)),
    ("position_priority", 0.7),
])
def test_factor_hand_values(name, expected):
    agent = AgentState("a1", Point2(0.0, 0.0))
    position = CandidatePosition("p1", Point2(3.0, 4.0), priority=0.7)
    got = FACTORS[name](agent, position, Point2(0.0, 1.0), Point2(10.0, 0.0))
    assert got == pytest.approx(expected, abs=1e-12)


def test_build_weights_is_linear_combination():
    agents = [AgentState("a1", Point2(0.0, 0.0)), AgentState("a2", Point2(10.0, 0.0))]
    positions = [CandidatePosition("p1", Point2(0.0, 5.0), 0.2),
                 CandidatePosition("p2", Point2(10.0, 5.0), 0.9)]
    ball, goal = Point2(5.0, 0.0), Point2(52.5, 0.0)
    model = LinearWeightModel({"agent_position_distance": 2.0, "position_priority": 0.5})
    w = build_weights(agents, positions, model, ball, goal)
    expected = np.array([
        [2.0 * -5.0 + 0.5 * 0.2, 2.0 * -math.hypot(10, 5) + 0.5 * 0.9],
        [2.0 * -math.hypot(10, 5) + 0.5 * 0.2, 2.0 * -5.0 + 0.5 * 0.9],
    ])
    np.testing.assert_allclose(w, expected, atol=1e-12)


def test_build_weights_validation():
    a = [AgentState("a1", Point2(0.0, 0.0))]
    p = [CandidatePosition("p1", Point2(1.0, 1.0))]
    with pytest.raises(InvariantViolation, match="non-empty"):
        build_weights([], p, DEFAULT_WEIGHTS, Point2(0, 0), Point2(0, 0))
    with pytest.raises(InvariantViolation, match="at least as many candidate"):
        build_weights(a + a, p, DEFAULT_WEIGHTS, Point2(0, 0), Point2(0, 0))
    with pytest.raises(InvariantViolation, match="unknown weight factor"):
        build_weights(a, p, LinearWeightModel({"shoe_size": 1.0}), Point2(0, 0), Point2(0, 0))
    with pytest.raises(InvariantViolation, match="non-finite coefficient"):
        LinearWeightModel({"position_priority": math.nan}).validate()


@pytest.mark.parametrize("kwargs", [dict(swarm=0), dict(bounds=((1.0, 0.0),)),
                                    dict(bounds=((0.0, math.inf),))])
def test_pso_config_validation(kwargs):
    with pytest.raises(InvariantViolation):
        PsoConfig(**kwargs)


def test_pso_zero_iterations_returns_best_initial_sample():
    # Velocities start at zero, so with no iterations the answer is exactly
    # the best point of the seeded initial swarm.
    cfg = PsoConfig(swarm=4, iterations=0, bounds=((-1.0, 1.0), (-1.0, 1.0)), seed=42)
    fitness = lambda x: -float((x ** 2).sum())
    best, best_s = pso_maximize(fitness, cfg)
    init = np.random.default_rng(42).uniform([-1.0, -1.0], [1.0, 1.0], (4, 2))
    scores = [fitness(x) for x in init]
    np.testing.assert_array_equal(best, init[int(np.argmax(scores))])
    assert best_s == max(scores)


def test_pso_stays_inside_bounds():
    seen = []

    def fitness(x):
        seen.append(x.copy())
        return float(np.sin(4.0 * x).sum())

    cfg = PsoConfig(swarm=6, iterations=30, bounds=((-2.0, -1.0), (3.0, 4.0)), seed=1)
    best, _ = pso_maximize(fitness, cfg)
    pts = np.array(seen)
    assert pts[:, 0].min() >= -2.0 and pts[:, 0].max() <= -1.0
    assert pts[:, 1].min() >= 3.0 and pts[:, 1].max() <= 4.0
    assert -2.0 <= best[0] <= -1.0 and 3.0 <= best[1] <= 4.0


def test_pso_is_deterministic_per_seed():
    fitness = lambda x: -float(((x - 0.3) ** 2).sum())
    cfg = PsoConfig(swarm=5, iterations=10, bounds=((-1.0, 1.0),) * 2, seed=7)
    b1, s1 = pso_maximize(fitness, cfg)
    b2, s2 = pso_maximize(fitness, cfg)
    np.testing.assert_array_equal(b1, b2)
    assert s1 == s2
    b3, _ = pso_maximize(fitness, PsoConfig(swarm=5, iterations=3,
                                            bounds=((-1.0, 1.0),) * 2, seed=8))
    assert not np.array_equal(b1, b3)


def test_pso_finds_sphere_optimum():
    target = np.array([0.25, -0.4, 0.1])
    fitness = lambda x: -float(((x - target) ** 2).sum())
    cfg = PsoConfig(bounds=((-1.0, 1.0),) * 3, iterations=60, seed=0)
    best, _ = pso_maximize(fitness, cfg)
    assert np.linalg.norm(best - target) < 0.05


def test_pso_rejects_non_finite_fitness():
    cfg = PsoConfig(swarm=2, iterations=1, bounds=((-1.0, 1.0),), seed=0)
    with pytest.raises(InvariantViolation, match="non-finite"):
        pso_maximize(lambda x: math.nan, cfg)


def test_pso_tune_needs_matching_bounds():
    with pytest.raises(InvariantViolation, match="one bounds pair per coefficient"):
        pso_tune(DEFAULT_WEIGHTS, lambda m: 0.0, PsoConfig(bounds=((0.0, 1.0),)))


def test_recovery_fitness_peaks_at_reference():
    scenes = scripted_scenes(5, seed=3)
    fitness = matching_score_fitness(scenes)
    ref_val = fitness(DEFAULT_WEIGHTS)
    # Scaling every coefficient leaves the argmax assignment unchanged.
    doubled = LinearWeightModel({k: 2.0 * v for k, v in DEFAULT_WEIGHTS.coefficients.items()})
    assert fitness(doubled) == pytest.approx(ref_val, abs=1e-9)


@settings(max_examples=25)
@given(st.lists(st.floats(0.0, 2.0), min_size=3, max_size=3))
def test_recovery_fitness_never_beats_reference(coeffs):
    scenes = scripted_scenes(4, seed=11)
    fitness = matching_score_fitness(scenes)
    ref_val = fitness(DEFAULT_WEIGHTS)
    names = list(DEFAULT_WEIGHTS.coefficients)
    candidate = LinearWeightModel(dict(zip(names, coeffs)))
    assert fitness(candidate) <= ref_val + 1e-9


def test_scene_from_json_defaults_and_errors():
    doc = {
        "agents": [{"id": "a1", "x": 0.0, "y": 0.0}],
        "positions": [{"id": "p1", "x": 5.0, "y": 5.0, "priority": 0.4}],
        "ball": [1.0, 2.0],
    }
    agents, positions, ball, goal, model = scene_from_json(doc)
    assert agents[0].id == "a1" and positions[0].priority == 0.4
    assert ball == Point2(1.0, 2.0)
    assert goal == Point2(52.5, 0.0)
    assert model.coefficients == DEFAULT_WEIGHTS.coefficients

    with pytest.raises(ParseError, match="malformed assignment scene"):
        scene_from_json({"agents": [{"id": "a1"}], "positions": [], "ball": [0, 0]})
    with pytest.raises(ParseError, match="malformed weight table"):
        scene_from_json(dict(doc, weights=[1.0, 2.0]))
    with pytest.raises(InvariantViolation, match="unknown weight factor"):
        scene_from_json(dict(doc, weights={"shoe_size": 1.0}))


def test_scripted_scenes_are_reproducible():
    s1 = scripted_scenes(3, seed=9)
    s2 = scripted_scenes(3, seed=9)
    assert len(s1) == 3
    for (a1, p1, b1, g1), (a2, p2, b2, g2) in zip(s1, s2):
        assert [a.pos for a in a1] == [a.pos for a in a2]
        assert [p.priority for p in p1] == [p.priority for p in p2]
        assert b1 == b2 and g1 == g2
    agents, positions, _, _ = s1[0]
    assert len(agents) == 4 and len(positions) == 6
