"""Deterministic 2-D scenario engine: a decaying ball, formation following with
optional nearest-agent chase, seeded perception noise, and the smoothness /
noise-robustness / observation protocols used to evaluate trained models.

Scenarios are ball-driven: models and context rules evaluated inside a run may
only depend on the feature rows ``ball_x`` and ``ball_y``. Each cycle: the ball
advances and decays, agents perceive it (plus Gaussian noise), the active
context steps, every agent gets a predicted target, and agents move toward
their goal point clamped to the speed cap.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .contexts import ContextSet, step_context
from .errors import InvariantViolation
from .geometry import Dataset, FieldConfig, Point2, Snapshot
from .pipeline import ContextModels, predict_all, predict_matrix
from . import jsonio

_BALL_ROWS = ("ball_x", "ball_y")


@dataclass(frozen=True)
class ScenarioConfig:
    cycles: int = 200
    ball_start: Point2 = Point2(0.0, 0.0)
    ball_velocity: Point2 = Point2(0.0, 0.0)
    decay: float = 0.94
    stop_threshold: float = 0.01
    max_speed: float = 0.5
    chase: bool = False
    noise: float = 0.0
    noise_is_variance: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.cycles < 1:
            raise InvariantViolation("cycle count must be positive")
        if self.max_speed <= 0:
            raise InvariantViolation("max speed must be positive")
        if self.noise < 0:
            raise InvariantViolation("noise must be non-negative")

    @property
    def noise_stddev(self) -> float:
        return math.sqrt(self.noise) if self.noise_is_variance else self.noise


@dataclass
class CycleRecord:
    cycle: int
    ball: Point2
    perceived: Point2
    targets: dict[str, Point2]
    actual: dict[str, Point2]
    context: str
    chaser: str | None


@dataclass
class ScenarioTrace:
    agent_ids: list[str]
    ball_start: Point2
    start: dict[str, Point2]
    records: list[CycleRecord]

    def positions(self, agent_id: str) -> list[Point2]:
        """Start position followed by the position after each cycle."""
        return [self.start[agent_id]] + [r.actual[agent_id] for r in self.records]

    def displacements(self, agent_id: str) -> list[float]:
        pts = self.positions(agent_id)
        return [pts[i + 1].dist(pts[i]) for i in range(len(pts) - 1)]


def _check_ball_driven(cm: ContextModels) -> None:
    bad = [r for n in cm.graph.nodes if n.kind == "feature"
           for r in n.rows if r not in _BALL_ROWS]
    if bad:
        raise InvariantViolation(
            f"context {cm.context!r}: scenario runs only supply {list(_BALL_ROWS)}, "
            f"models also need {bad}")


def run_scenario(cm, cs: ContextSet | None, cfg: ScenarioConfig,
                 start: Mapping[str, Point2] | None = None) -> ScenarioTrace:
    """Run one scenario. ``cm`` is either a single ContextModels used for every
    context, or a mapping from context name to ContextModels."""
    if isinstance(cm, ContextModels):
        by_context: Mapping[str, ContextModels] | None = None
        first = cm
    else:
        by_context = dict(cm)
        if not by_context:
            raise InvariantViolation("no trained models supplied")
        first = next(iter(by_context.values()))
    agent_ids = list(first.graph.agent_ids())
    for one in ([first] if by_context is None else by_context.values()):
        _check_ball_driven(one)
        if set(one.graph.agent_ids()) != set(agent_ids):
            raise InvariantViolation("context model bundles disagree on the agent set")
        missing = [a for a in agent_ids if a not in one.models]
        if missing:
            raise InvariantViolation(f"context {one.context!r}: no model for agents {missing}")
    if cs is not None:
        bad = [f for f in cs.feature_names() if f not in _BALL_ROWS]
        if bad:
            raise InvariantViolation(f"context rules reference non-ball features {bad}")
        active = cs.initial
    else:
        active = first.context
    if start is None:
        pos = {a: Point2(0.0, 0.0) for a in agent_ids}
    else:
        missing = [a for a in agent_ids if a not in start]
        if missing:
            raise InvariantViolation(f"no start position for agents {missing}")
        pos = {a: start[a] for a in agent_ids}
    trace = ScenarioTrace(agent_ids, cfg.ball_start, dict(pos), [])

    rng = np.random.default_rng(cfg.seed)
    ball = cfg.ball_start
    vel = cfg.ball_velocity
    sd = cfg.noise_stddev
    for cycle in range(1, cfg.cycles + 1):
        if vel.norm() < cfg.stop_threshold:
            vel = Point2(0.0, 0.0)
        ball = ball + vel
        vel = vel.scaled(cfg.decay)
        # always draw, so traces with the same seed share a noise stream
        # across noise settings
        gx, gy = rng.standard_normal(2)
        perceived = Point2(ball.x + sd * gx, ball.y + sd * gy)
        feats = {"ball_x": perceived.x, "ball_y": perceived.y}
        if cs is not None:
            active = step_context(cs, active, feats)
        models = first if by_context is None else by_context.get(active)
        if models is None:
            raise InvariantViolation(f"no trained models for context {active!r}")
        targets = predict_all(models, feats)
        chaser = None
        if cfg.chase:
            chaser = min(agent_ids, key=lambda a: (pos[a].dist(perceived), a))
        nxt = {}
        for a in agent_ids:
            goal = perceived if a == chaser else targets[a]
            d = pos[a].dist(goal)
            if d <= cfg.max_speed:
                nxt[a] = goal
            else:
                nxt[a] = pos[a] + (goal - pos[a]).scaled(cfg.max_speed / d)
        pos = nxt
        trace.records.append(CycleRecord(cycle, ball, perceived, targets, dict(pos), active, chaser))
    return trace


@dataclass(frozen=True)
class SmoothnessReport:
    angle_mean: float
    angle_std: float
    angle_mean_unfiltered: float
    angle_std_unfiltered: float
    dist_mean: float
    dist_std: float
    n_angles: int
    n_angles_unfiltered: int


def _mean_std(xs: list[float]) -> tuple[float, float]:
    if not xs:
        return (math.nan, math.nan)
    return (float(np.mean(xs)), float(np.std(xs)))


def smoothness(tr: ScenarioTrace, motion_eps: float = 1e-6) -> SmoothnessReport:
    """Movement-direction change (degrees, in [0, 180]) and distance moved,
    pooled over agents and cycles.

    The filtered angle statistics keep only turns where the agent moved more
    than ``motion_eps`` in both adjacent cycles; large direction flips from
    near-zero wiggles otherwise dominate. The unfiltered variant keeps every
    turn with nonzero motion on both sides.
    """
    if len(tr.records) < 3:
        raise InvariantViolation("smoothness needs a trace of at least 3 cycles")
    angles: list[float] = []
    angles_u: list[float] = []
    dists: list[float] = []
    for a in tr.agent_ids:
        pts = tr.positions(a)
        segs = [pts[i + 1] - pts[i] for i in range(len(pts) - 1)]
        lens = [s.norm() for s in segs]
        dists.extend(lens)
        for i in range(len(segs) - 1):
            l0, l1 = lens[i], lens[i + 1]
            if l0 == 0.0 or l1 == 0.0:
                continue
            dot = segs[i].x * segs[i + 1].x + segs[i].y * segs[i + 1].y
            ang = math.degrees(math.acos(max(-1.0, min(1.0, dot / (l0 * l1)))))
            angles_u.append(ang)
            if l0 > motion_eps and l1 > motion_eps:
                angles.append(ang)
    am, asd = _mean_std(angles)
    aum, ausd = _mean_std(angles_u)
    dm, dsd = _mean_std(dists)
    return SmoothnessReport(am, asd, aum, ausd, dm, dsd, len(angles), len(angles_u))


@dataclass(frozen=True)
class RobustnessRow:
    stddev: float
    E: float
    error_std: float


def robustness_sweep(cm: ContextModels, d: Dataset, idx: Sequence[int],
                     stddevs: Sequence[float], seed: int = 0,
                     as_variance: bool = False) -> list[RobustnessRow]:
    """Evaluate on the given dataset columns with Gaussian noise of each stddev
    added to the feature rows. One unit-noise draw is shared by all stddevs
    (common random numbers), so the zero row reproduces the plain evaluation
    exactly and rows are comparable.
    """
    if not stddevs:
        raise InvariantViolation("noise level list is empty")
    idx = list(idx)
    if not idx:
        raise InvariantViolation("no columns to evaluate")
    m = d.matrix()
    row_index = {name: i for i, name in enumerate(d.row_names())}
    feats = {name: m[row_index[name], idx] for name in d.feature_rows}
    rng = np.random.default_rng(seed)
    unit = {name: rng.standard_normal(len(idx)) for name in d.feature_rows}
    rows: list[RobustnessRow] = []
    for s in stddevs:
        sd = math.sqrt(float(s)) if as_variance else float(s)
        if sd < 0 or not math.isfinite(sd):
            raise InvariantViolation(f"bad noise level {s!r}")
        noisy = {name: feats[name] + sd * unit[name] for name in d.feature_rows}
        preds = predict_matrix(cm, noisy)
        pooled = []
        for a, pred in preds.items():
            rx, ry = cm.graph.node(a).rows
            target = m[[row_index[rx], row_index[ry]]][:, idx].T
            pooled.append(np.linalg.norm(target - pred, axis=1))
        alld = np.concatenate(pooled)
        rows.append(RobustnessRow(float(s), float(alld.mean()), float(alld.std())))
    return rows


@dataclass
class ParametricFormationPolicy:
    """Reference positioning rule: each agent sits at
    ``home + w * (ball - home)``, i.e. on the segment from its home position
    toward the ball."""
    home: dict[str, Point2]
    weights: float | Mapping[str, float] = 0.3

    def __call__(self, ball: Point2) -> dict[str, Point2]:
        out = {}
        for a, h in self.home.items():
            w = self.weights[a] if isinstance(self.weights, Mapping) else self.weights
            out[a] = h + (ball - h).scaled(w)
        return out


def uniform_ball_sampler(field: FieldConfig = FieldConfig()) -> Callable[[np.random.Generator], Point2]:
    hl, hw = field.length / 2.0, field.width / 2.0

    def sample(rng: np.random.Generator) -> Point2:
        return Point2(float(rng.uniform(-hl, hl)), float(rng.uniform(-hw, hw)))

    return sample


def observe_policy(policy: Callable[[Point2], Mapping[str, Point2]],
                   sampler: Callable[[np.random.Generator], Point2],
                   n: int, seed: int = 0,
                   field: FieldConfig = FieldConfig()) -> Dataset:
    """Sample ball positions, query the reference policy for every agent's
    target, and emit a demonstration dataset (the learning-from-observation
    pathway)."""
    if n < 1:
        raise InvariantViolation("need at least one observed sample")
    rng = np.random.default_rng(seed)
    agent_ids: list[str] | None = None
    snaps: list[Snapshot] = []
    for _ in range(n):
        ball = sampler(rng)
        targets = policy(ball)
        if agent_ids is None:
            agent_ids = list(targets)
            if not agent_ids:
                raise InvariantViolation("policy returned no agents")
        elif list(targets) != agent_ids:
            raise InvariantViolation("policy changed its agent set between samples")
        pts = []
        for a in agent_ids:
            t = targets[a]
            # Point2 rejects non-finite coordinates
            pts.append(t if isinstance(t, Point2) else Point2(float(t[0]), float(t[1])))
        snaps.append(Snapshot([ball.x, ball.y], pts))
    d = Dataset(field, list(_BALL_ROWS), agent_ids, snaps)
    d.validate()
    return d


def trace_to_csv(tr: ScenarioTrace) -> str:
    ff = jsonio.format_fixed
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    header = ["cycle", "ball_x", "ball_y"]
    for a in tr.agent_ids:
        header += [f"{a}_x", f"{a}_y", f"{a}_target_x", f"{a}_target_y"]
    header += ["context", "chaser"]
    wr.writerow(header)
    for r in tr.records:
        row = [str(r.cycle), ff(r.ball.x), ff(r.ball.y)]
        for a in tr.agent_ids:
            p, t = r.actual[a], r.targets[a]
            row += [ff(p.x), ff(p.y), ff(t.x), ff(t.y)]
        row += [r.context, r.chaser or ""]
        wr.writerow(row)
    return buf.getvalue()


def _xy(p: Point2) -> list[float]:
    return [p.x, p.y]


def trace_to_json(tr: ScenarioTrace) -> dict:
    return {
        "agent_ids": list(tr.agent_ids),
        "ball_start": _xy(tr.ball_start),
        "start": {a: _xy(p) for a, p in tr.start.items()},
        "records": [
            {
                "cycle": r.cycle,
                "ball": _xy(r.ball),
                "perceived": _xy(r.perceived),
                "targets": {a: _xy(p) for a, p in r.targets.items()},
                "actual": {a: _xy(p) for a, p in r.actual.items()},
                "context": r.context,
                "chaser": r.chaser,
            }
            for r in tr.records
        ],
    }


def _pt(v) -> Point2:
    return Point2(float(v[0]), float(v[1]))


def trace_from_json(obj) -> ScenarioTrace:
    agent_ids = [str(a) for a in obj["agent_ids"]]
    records = [
        CycleRecord(
            cycle=int(r["cycle"]),
            ball=_pt(r["ball"]),
            perceived=_pt(r["perceived"]),
            targets={a: _pt(p) for a, p in r["targets"].items()},
            actual={a: _pt(p) for a, p in r["actual"].items()},
            context=str(r["context"]),
            chaser=None if r["chaser"] is None else str(r["chaser"]),
        )
        for r in obj["records"]
    ]
    return ScenarioTrace(agent_ids, _pt(obj["ball_start"]),
                         {a: _pt(p) for a, p in obj["start"].items()}, records)


def save_trace_csv(path, tr: ScenarioTrace) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(trace_to_csv(tr))


def save_trace_json(path, tr: ScenarioTrace) -> None:
    jsonio.write_canonical(path, trace_to_json(tr))


def load_trace(path) -> ScenarioTrace:
    return trace_from_json(jsonio.read_json(path))


def plot_trace_svg(path, tr: ScenarioTrace, field: FieldConfig = FieldConfig()) -> None:
    """Field plot of the ball path and every agent's path."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    hl, hw = field.length / 2.0, field.width / 2.0
    fig, ax = plt.subplots(figsize=(9, 9 * field.width / field.length))
    ax.add_patch(plt.Rectangle((-hl, -hw), field.length, field.width,
                               fill=False, edgecolor="0.4"))
    ax.plot([0, 0], [-hw, hw], color="0.8", lw=1)
    bx = [tr.ball_start.x] + [r.ball.x for r in tr.records]
    by = [tr.ball_start.y] + [r.ball.y for r in tr.records]
    ax.plot(bx, by, color="black", lw=1.5, label="ball")
    ax.plot(bx[0], by[0], marker="o", color="black")
    for a in tr.agent_ids:
        pts = tr.positions(a)
        ax.plot([p.x for p in pts], [p.y for p in pts], lw=1)
        ax.plot(pts[-1].x, pts[-1].y, marker="o", ms=4)
        ax.annotate(a, (pts[-1].x, pts[-1].y), fontsize=7,
                    textcoords="offset points", xytext=(3, 3))
    ax.set_xlim(-hl - 3, hl + 3)
    ax.set_ylim(-hw - 3, hw + 3)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
