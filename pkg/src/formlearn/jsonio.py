"""Canonical JSON serialization.

All files this package writes go through ``canonical_dumps``: keys sorted,
floats rendered with a fixed formatter, compact separators, trailing newline.
Saving what was just loaded therefore reproduces the file byte for byte.

Two float formatters are used: coordinates and feature values are written with
6 decimals (datasets, traces), model weights with 17 significant digits so the
exact float64 value round-trips.
"""
from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Callable

from .errors import ArtifactError, InvariantViolation, ParseError

FloatFormat = Callable[[float], str]


def format_fixed(v: float) -> str:
    """6-decimal fixed-point; anything that renders as -0.000000 (negative
    zero, tiny negatives) is normalized to 0.000000."""
    if not math.isfinite(v):
        raise InvariantViolation(f"non-finite value {v!r} cannot be serialized")
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


def format_exact(v: float) -> str:
    """Shortest representation that round-trips the exact float64."""
    if not math.isfinite(v):
        raise InvariantViolation(f"non-finite value {v!r} cannot be serialized")
    if v == 0.0:
        v = 0.0
    return f"{v:.17g}"


def canonical_dumps(obj, float_fmt: FloatFormat = format_fixed) -> str:
    parts: list[str] = []
    _emit(obj, parts, float_fmt)
    parts.append("\n")
    return "".join(parts)


def _emit(obj, out: list[str], ffmt: FloatFormat) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(ffmt(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out, ffmt)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise InvariantViolation(f"JSON object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _emit(obj[key], out, ffmt)
        out.append("}")
    else:
        raise InvariantViolation(f"cannot serialize object of type {type(obj).__name__}")


def write_canonical(path, obj, float_fmt: FloatFormat = format_fixed) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    path = Path(path)
    text = canonical_dumps(obj, float_fmt)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ArtifactError(f"cannot read {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: invalid JSON: {e}") from e
