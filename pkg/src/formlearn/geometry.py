"""Field geometry, snapshots, and the demonstration dataset.

A dataset is stored snapshot-major on disk but exposes a matrix view
(row = one feature or one agent coordinate, column = one snapshot) which is
what the dependency graph and the training pipeline reason about. Coordinates
are meters in the field frame: origin at field centre, x toward the opponent
goal, y to the left.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, ParseError
from . import jsonio


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvariantViolation(f"non-finite point ({self.x!r}, {self.y!r})")
        # frozen dataclass, so coerce int coordinates to float via the back door
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Point2":
        return Point2(self.x * k, self.y * k)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class FieldConfig:
    length: float = 105.0
    width: float = 68.0

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise InvariantViolation("field dimensions must be positive")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.length, self.width)


@dataclass
class Snapshot:
    features: list[float]
    targets: list[Point2]


def coordinate_rows(agent_id: str) -> tuple[str, str]:
    """The two matrix rows an agent owns."""
    return (f"{agent_id}_x", f"{agent_id}_y")


@dataclass
class Dataset:
    field: FieldConfig
    feature_rows: list[str]
    agent_rows: list[str]
    snapshots: list[Snapshot] = field(default_factory=list)

    def validate(self) -> None:
        if len(set(self.feature_rows)) != len(self.feature_rows):
            raise InvariantViolation("duplicate feature row names")
        if len(set(self.agent_rows)) != len(self.agent_rows):
            raise InvariantViolation("duplicate agent ids")
        overlap = set(self.feature_rows) & {r for a in self.agent_rows for r in coordinate_rows(a)}
        if overlap:
            raise InvariantViolation(f"feature rows collide with agent coordinate rows: {sorted(overlap)}")
        nf, na = len(self.feature_rows), len(self.agent_rows)
        for i, snap in enumerate(self.snapshots):
            if len(snap.features) != nf:
                raise InvariantViolation(
                    f"snapshot {i}: {len(snap.features)} feature values, header lists {nf}")
            if len(snap.targets) != na:
                raise InvariantViolation(
                    f"snapshot {i}: {len(snap.targets)} targets, header lists {na} agents")
            for j, v in enumerate(snap.features):
                if not math.isfinite(v):
                    raise InvariantViolation(f"snapshot {i}: non-finite value in feature row {j}")

    def row_names(self) -> list[str]:
        names = list(self.feature_rows)
        for a in self.agent_rows:
            names.extend(coordinate_rows(a))
        return names

    @property
    def n_columns(self) -> int:
        return len(self.snapshots)

    def matrix(self) -> np.ndarray:
        """(rows, columns) view of the dataset; columns are snapshots."""
        n = self.n_columns
        m = np.empty((len(self.row_names()), n))
        nf = len(self.feature_rows)
        for c, snap in enumerate(self.snapshots):
            m[:nf, c] = snap.features
            for k, t in enumerate(snap.targets):
                m[nf + 2 * k, c] = t.x
                m[nf + 2 * k + 1, c] = t.y
        return m


def dataset_to_json(d: Dataset) -> dict:
    return {
        "field": {"length": d.field.length, "width": d.field.width},
        "feature_rows": list(d.feature_rows),
        "agent_rows": list(d.agent_rows),
        "snapshots": [
            {"features": [float(v) for v in s.features],
             "targets": [[t.x, t.y] for t in s.targets]}
            for s in d.snapshots
        ],
    }


def dataset_from_json(obj) -> Dataset:
    try:
        fld = FieldConfig(float(obj["field"]["length"]), float(obj["field"]["width"]))
        feature_rows = [str(x) for x in obj["feature_rows"]]
        agent_rows = [str(x) for x in obj["agent_rows"]]
        raw_snaps = obj["snapshots"]
    except (KeyError, TypeError) as e:
        raise ParseError(f"malformed dataset document: {e!r}") from e
    snaps = []
    for i, rs in enumerate(raw_snaps):
        try:
            feats = [float(v) for v in rs["features"]]
            targets = [Point2(float(t[0]), float(t[1])) for t in rs["targets"]]
        except InvariantViolation:
            raise
        except (KeyError, TypeError, IndexError, ValueError) as e:
            raise ParseError(f"malformed snapshot {i}: {e!r}") from e
        snaps.append(Snapshot(feats, targets))
    d = Dataset(fld, feature_rows, agent_rows, snaps)
    d.validate()
    return d


def load_dataset(path) -> Dataset:
    return dataset_from_json(jsonio.read_json(path))


def dumps_dataset(d: Dataset) -> str:
    d.validate()
    return jsonio.canonical_dumps(dataset_to_json(d))


def save_dataset(path, d: Dataset) -> None:
    d.validate()
    jsonio.write_canonical(path, dataset_to_json(d))


def export_csv(d: Dataset) -> str:
    """One line per matrix row: row name followed by the value in each snapshot."""
    m = d.matrix()
    lines = []
    for name, row in zip(d.row_names(), m):
        lines.append(",".join([name] + [jsonio.format_fixed(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DataSplit:
    train_idx: tuple[int, ...]
    val_idx: tuple[int, ...]
    test_idx: tuple[int, ...]
    seed: int


def split_indices(n: int, fractions=(0.7, 0.1, 0.2), seed: int = 0) -> DataSplit:
    """Deterministic shuffled train/val/test split over ``range(n)``.

    Sizes are floor-allocated from the fractions; the remainder goes to train.
    """
    if n < 3:
        raise InvariantViolation(f"need at least 3 snapshots to split, got {n}")
    ftr, fva, fte = fractions
    if min(ftr, fva, fte) <= 0:
        raise InvariantViolation("split fractions must be positive")
    if abs(ftr + fva + fte - 1.0) > 1e-9:
        raise InvariantViolation("split fractions must sum to 1")
    # tiny epsilon so e.g. 0.3*10 == 2.9999999999999996 still floors to 3
    n_val = int(fva * n + 1e-9)
    n_test = int(fte * n + 1e-9)
    n_train = n - n_val - n_test
    idx = list(range(n))
    random.Random(seed).shuffle(idx)
    return DataSplit(
        train_idx=tuple(idx[:n_train]),
        val_idx=tuple(idx[n_train:n_train + n_val]),
        test_idx=tuple(idx[n_train + n_val:]),
        seed=seed,
    )


def split_dataset(d: Dataset, fractions=(0.7, 0.1, 0.2), seed: int = 0) -> DataSplit:
    return split_indices(d.n_columns, fractions, seed)
