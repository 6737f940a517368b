"""Feature extraction from a bounded history of raw attribute values.

Attributes arrive once per cycle; some may be unknown under partial
observation. A schema names the features a model or a context rule consumes;
each name resolves to an extractor, a pure function of the history window.

Resolution order for a schema name:
  1. an explicitly registered extractor of that name,
  2. ``<attr>_vx`` / ``<attr>_vy``: finite-difference velocity of ``<attr>_x``
     (resp. ``_y``) between the two most recent known frames,
  3. ``<base>_avg``: moving average of attribute ``<base>`` over the window,
  4. otherwise the identity extractor on the attribute of the same name,
     holding the last known value when the newest frames are unknown.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import FeatureError

DEFAULT_WINDOW = 5


@dataclass
class AttributeFrame:
    time: int
    values: dict[str, float | None]

    def known(self, name: str) -> bool:
        return self.values.get(name) is not None


class History:
    """Ring of the most recent ``k`` frames, cycles strictly increasing."""

    def __init__(self, k: int = DEFAULT_WINDOW):
        if k < 1:
            raise FeatureError("history window must hold at least one frame")
        self.k = k
        self.frames: list[AttributeFrame] = []

    def push(self, frame: AttributeFrame) -> None:
        if self.frames and frame.time <= self.frames[-1].time:
            raise FeatureError(
                f"frame cycle {frame.time} not after latest cycle {self.frames[-1].time}")
        self.frames.append(frame)
        if len(self.frames) > self.k:
            del self.frames[0]

    def __len__(self) -> int:
        return len(self.frames)

    def newest_known(self, attr: str) -> tuple[int, float] | None:
        """(cycle, value) of the most recent frame where ``attr`` is known."""
        for fr in reversed(self.frames):
            if fr.known(attr):
                return fr.time, float(fr.values[attr])
        return None

    def known_values(self, attr: str) -> list[tuple[int, float]]:
        return [(fr.time, float(fr.values[attr])) for fr in self.frames if fr.known(attr)]


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: tuple[float, ...]

    def as_map(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))

    def __len__(self) -> int:
        return len(self.values)


Extractor = Callable[[History], float]


def identity(attr: str) -> Extractor:
    """Latest known value of ``attr`` in the window (hold-last policy)."""
    def _extract(h: History) -> float:
        hit = h.newest_known(attr)
        if hit is None:
            raise FeatureError(f"attribute {attr!r} unknown throughout the history window")
        return hit[1]
    return _extract


def velocity(attr: str) -> Extractor:
    """Finite-difference slope of ``attr`` between the two newest known frames.

    A single known frame yields 0.0 (no motion observed yet).
    """
    def _extract(h: History) -> float:
        known = h.known_values(attr)
        if not known:
            raise FeatureError(f"attribute {attr!r} unknown throughout the history window")
        if len(known) < 2:
            return 0.0
        (t0, v0), (t1, v1) = known[-2], known[-1]
        return (v1 - v0) / (t1 - t0)
    return _extract


def moving_average(attr: str) -> Extractor:
    def _extract(h: History) -> float:
        known = h.known_values(attr)
        if not known:
            raise FeatureError(f"attribute {attr!r} unknown throughout the history window")
        return sum(v for _, v in known) / len(known)
    return _extract


def speed(attr_x: str, attr_y: str) -> Extractor:
    """Magnitude of the finite-difference velocity of an (x, y) attribute pair."""
    vx, vy = velocity(attr_x), velocity(attr_y)
    def _extract(h: History) -> float:
        return (vx(h) ** 2 + vy(h) ** 2) ** 0.5
    return _extract


@dataclass
class FeatureRegistry:
    extractors: dict[str, Extractor] = field(default_factory=dict)

    def register(self, name: str, fn: Extractor) -> None:
        if name in self.extractors:
            raise FeatureError(f"extractor {name!r} already registered")
        self.extractors[name] = fn

    def resolve(self, name: str) -> Extractor:
        if name in self.extractors:
            return self.extractors[name]
        if name.endswith("_vx"):
            return velocity(name[:-3] + "_x")
        if name.endswith("_vy"):
            return velocity(name[:-3] + "_y")
        if name.endswith("_avg"):
            return moving_average(name[:-4])
        return identity(name)


def extract(h: History, schema, registry: FeatureRegistry | None = None) -> FeatureVector:
    """One scalar per schema entry, in schema order."""
    if len(h) == 0:
        raise FeatureError("cannot extract features from an empty history")
    registry = registry or FeatureRegistry()
    names = tuple(schema)
    values = tuple(float(registry.resolve(n)(h)) for n in names)
    return FeatureVector(names, values)
