"""Dynamic position assignment: maximum-weight matching of n agents to
k >= n candidate positions, a pluggable linear weight model, and a PSO tuner
for its coefficients.

The solver is the classical O(n^2 k) potential/augmenting-path Hungarian run
on negated weights; every agent is matched, surplus positions stay unused
(equivalent to padding with zero-weight dummy agents). On top of the optimal
value, a pinning pass selects the lexicographically smallest optimal pairs
vector, so independent solver instances given identical matrices agree on
every pair - the property the decentralized consumers rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InvariantViolation
from .geometry import Point2

# relative slack when comparing float matching totals during pinning
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[int, ...]  # pairs[i] = position index assigned to agent i
    total: float

    def as_dict(self) -> dict[int, int]:
        return dict(enumerate(self.pairs))


def _min_cost_value(cost: np.ndarray) -> float:
    """Optimal total of the rectangular min-cost assignment (rows <= cols).

    Potential-based Hungarian; 1-based arrays with a virtual column 0.
    """
    n, m = cost.shape
    if n == 0:
        return 0.0
    INF = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)  # p[j] = row matched to column j (0 = free)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = -1
            row = cost[i0 - 1]
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    total = 0.0
    for j in range(1, m + 1):
        if p[j]:
            total += cost[p[j] - 1][j - 1]
    return total


def _max_total(w: np.ndarray) -> float:
    if w.shape[0] == 0:
        return 0.0
    return -_min_cost_value(-w)


def solve_assignment(w) -> Assignment:
    """Maximum-weight injective assignment of every agent to a position.

    Returns the lexicographically smallest pairs vector among the optimal
    matchings (agent 0's position index first).
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise InvariantViolation("weight matrix must be 2-D")
    n, k = w.shape
    if n == 0:
        raise InvariantViolation("no agents")
    if k < n:
        raise InvariantViolation(f"need at least as many positions as agents ({n} > {k})")
    if not np.all(np.isfinite(w)):
        raise InvariantViolation("non-finite weight")
    best = _max_total(w)
    tol = _TIE_RTOL * max(1.0, float(np.abs(w).sum()))
    pairs: list[int] = []
    free = list(range(k))
    prefix = 0.0
    for i in range(n):
        rest_rows = w[i + 1:]
        for idx, j in enumerate(free):
            rest_cols = free[:idx] + free[idx + 1:]
            candidate = prefix + w[i, j] + _max_total(rest_rows[:, rest_cols])
            if candidate >= best - tol:
                pairs.append(j)
                prefix += w[i, j]
                free.pop(idx)
                break
        else:  # cannot happen: some completion always attains the optimum
            raise InvariantViolation("no optimal completion found during pinning")
    total = float(sum(w[i, j] for i, j in enumerate(pairs)))
    return Assignment(tuple(pairs), total)


@dataclass(frozen=True)
class AgentState:
    id: str
    pos: Point2


@dataclass(frozen=True)
class CandidatePosition:
    id: str
    pos: Point2
    priority: float = 0.0


# Each factor maps (agent, position, ball, goal) to a score where larger is
# better, hence the negated distances.
WeightFactor = Callable[[AgentState, CandidatePosition, Point2, Point2], float]

FACTORS: dict[str, WeightFactor] = {
    "agent_position_distance": lambda a, p, ball, goal: -a.pos.dist(p.pos),
    "position_goal_distance": lambda a, p, ball, goal: -p.pos.dist(goal),
    "position_ball_distance": lambda a, p, ball, goal: -p.pos.dist(ball),
    "position_priority": lambda a, p, ball, goal: p.priority,
}


@dataclass
class LinearWeightModel:
    coefficients: dict[str, float]

    def validate(self) -> None:
        for name, c in self.coefficients.items():
            if name not in FACTORS:
                raise InvariantViolation(f"unknown weight factor {name!r}")
            if not math.isfinite(c):
                raise InvariantViolation(f"non-finite coefficient for {name!r}")


def build_weights(agents: Sequence[AgentState], positions: Sequence[CandidatePosition],
                  model: LinearWeightModel, ball: Point2, goal: Point2) -> np.ndarray:
    if not agents or not positions:
        raise InvariantViolation("agents and positions must be non-empty")
    if len(positions) < len(agents):
        raise InvariantViolation("need at least as many candidate positions as agents")
    model.validate()
    w = np.zeros((len(agents), len(positions)))
    for name, coef in model.coefficients.items():
        f = FACTORS[name]
        for i, a in enumerate(agents):
            for j, p in enumerate(positions):
                w[i, j] += coef * f(a, p, ball, goal)
    return w


@dataclass
class PsoConfig:
    swarm: int = 20
    inertia: float = 0.72
    cognitive: float = 1.49
    social: float = 1.49
    iterations: int = 100
    bounds: tuple[tuple[float, float], ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.swarm < 1 or self.iterations < 0:
            raise InvariantViolation("swarm size and iteration count must be positive")
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise InvariantViolation(f"bad coefficient bounds ({lo}, {hi})")


def pso_maximize(fitness: Callable[[np.ndarray], float], cfg: PsoConfig) -> tuple[np.ndarray, float]:
    """Global-best PSO over cfg.bounds. Velocities start at zero; positions are
    clamped to the bounds after each move. Deterministic under cfg.seed."""
    if not cfg.bounds:
        raise InvariantViolation("PSO needs bounds for every coordinate")
    lo = np.array([b[0] for b in cfg.bounds])
    hi = np.array([b[1] for b in cfg.bounds])
    d = lo.size
    rng = np.random.default_rng(cfg.seed)
    pos = rng.uniform(lo, hi, (cfg.swarm, d))
    vel = np.zeros((cfg.swarm, d))

    def score(x: np.ndarray) -> float:
        s = float(fitness(x))
        if not math.isfinite(s):
            raise InvariantViolation(f"fitness returned non-finite value at {x}")
        return s

    pbest = pos.copy()
    pbest_s = np.array([score(x) for x in pos])
    g = int(np.argmax(pbest_s))
    gbest, gbest_s = pbest[g].copy(), float(pbest_s[g])
    for _ in range(cfg.iterations):
        r1 = rng.uniform(size=(cfg.swarm, d))
        r2 = rng.uniform(size=(cfg.swarm, d))
        vel = cfg.inertia * vel + cfg.cognitive * r1 * (pbest - pos) + cfg.social * r2 * (gbest - pos)
        pos = np.clip(pos + vel, lo, hi)
        for idx in range(cfg.swarm):
            s = score(pos[idx])
            if s > pbest_s[idx]:
                pbest_s[idx] = s
                pbest[idx] = pos[idx].copy()
                if s > gbest_s:
                    gbest_s = s
                    gbest = pos[idx].copy()
    return gbest, gbest_s


def pso_tune(template: LinearWeightModel, fitness: Callable[[LinearWeightModel], float],
             cfg: PsoConfig) -> LinearWeightModel:
    """Tune the template's coefficients; cfg.bounds align with the template's
    coefficient order."""
    names = list(template.coefficients)
    if len(cfg.bounds) != len(names):
        raise InvariantViolation(
            f"need one bounds pair per coefficient ({len(names)}), got {len(cfg.bounds)}")

    def vec_fitness(x: np.ndarray) -> float:
        return fitness(LinearWeightModel(dict(zip(names, x.tolist()))))

    best, _ = pso_maximize(vec_fitness, cfg)
    return LinearWeightModel(dict(zip(names, best.tolist())))


DEFAULT_WEIGHTS = LinearWeightModel({
    "agent_position_distance": 1.0,
    "position_ball_distance": 0.3,
    "position_priority": 1.0,
})


def scene_from_json(obj) -> tuple[list[AgentState], list[CandidatePosition], Point2, Point2,
                                  LinearWeightModel]:
    """Parse an assignment scene document: agents, candidate positions, ball,
    optional goal (default opponent goal mouth) and optional weight overrides."""
    from .errors import ParseError
    try:
        agents = [AgentState(str(a["id"]), Point2(float(a["x"]), float(a["y"])))
                  for a in obj["agents"]]
        positions = [CandidatePosition(str(p["id"]), Point2(float(p["x"]), float(p["y"])),
                                       float(p.get("priority", 0.0)))
                     for p in obj["positions"]]
        ball = Point2(float(obj["ball"][0]), float(obj["ball"][1]))
        goal_raw = obj.get("goal", [52.5, 0.0])
        goal = Point2(float(goal_raw[0]), float(goal_raw[1]))
        weights = obj.get("weights")
    except InvariantViolation:
        raise
    except (KeyError, TypeError, IndexError, ValueError) as e:
        raise ParseError(f"malformed assignment scene: {e!r}") from e
    if weights is None:
        model = LinearWeightModel(dict(DEFAULT_WEIGHTS.coefficients))
    else:
        try:
            model = LinearWeightModel({str(k): float(v) for k, v in weights.items()})
        except (AttributeError, TypeError, ValueError) as e:
            raise ParseError(f"malformed weight table: {e!r}") from e
    model.validate()
    return agents, positions, ball, goal, model


def scripted_scenes(n_scenes: int, seed: int, n_agents: int = 4, n_positions: int = 6,
                    half_length: float = 52.5, half_width: float = 34.0):
    """Random but reproducible scenes for the matching-score fitness."""
    rng = np.random.default_rng(seed)
    scenes = []
    for _ in range(n_scenes):
        def pt():
            return Point2(float(rng.uniform(-half_length, half_length)),
                          float(rng.uniform(-half_width, half_width)))
        agents = [AgentState(f"a{i + 1}", pt()) for i in range(n_agents)]
        positions = [CandidatePosition(f"p{j + 1}", pt(), float(rng.uniform(0, 1)))
                     for j in range(n_positions)]
        scenes.append((agents, positions, pt(), Point2(half_length, 0.0)))
    return scenes


def matching_score_fitness(scenes, reference: LinearWeightModel = DEFAULT_WEIGHTS
                           ) -> Callable[[LinearWeightModel], float]:
    """Mean matching score over the scripted scenes: the candidate weights pick
    each scene's assignment, the fixed reference model scores it. Bounded above
    by the reference-optimal mean, reached when the candidate reproduces the
    reference assignments."""
    ref = [build_weights(agents, positions, reference, ball, goal)
           for agents, positions, ball, goal in scenes]

    def _fitness(model: LinearWeightModel) -> float:
        totals = []
        for (agents, positions, ball, goal), rw in zip(scenes, ref):
            w = build_weights(agents, positions, model, ball, goal)
            pairs = solve_assignment(w).pairs
            totals.append(sum(rw[i, j] for i, j in enumerate(pairs)))
        return float(np.mean(totals))
    return _fitness
