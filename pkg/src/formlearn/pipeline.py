"""Per-context training: walk the dependency graph in training order and
recursively replace demonstrated agent rows with estimated positions.

Targets always come from the original demonstrated matrix; only input rows
are replaced, so followers learn against the leader positions they will
actually see at execution time while supervision stays intact. Test columns
are replaced too by default, making the reported test error reflect the
deployment condition; ``propagate_test=False`` keeps demonstrated leader
positions in the test columns instead.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import GraphError, InvariantViolation
from .geometry import DataSplit, Dataset, Point2, split_indices
from .depgraph import DependencyGraph, graph_from_json, graph_to_json, inputs_of, training_order, validate
from .mlp import (MlpModel, MlpSpec, TrainConfig, TrainReport, forward_batch, model_from_json,
                  model_to_json, train)
from . import jsonio


@dataclass
class PipelineConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    fractions: tuple[float, float, float] = (0.7, 0.1, 0.2)
    n_hidden: int = 36
    hidden_overrides: dict[str, int] = field(default_factory=dict)
    propagate_estimates: bool = True
    propagate_test: bool = True
    seed: int = 0


@dataclass
class ContextModels:
    context: str
    graph: DependencyGraph
    models: dict[str, MlpModel]
    reports: dict[str, TrainReport]
    split: DataSplit
    config: PipelineConfig
    final_matrix: np.ndarray | None = None  # working copy after training; not serialized


def node_seed(base_seed: int, node_id: str) -> int:
    """Stable per-node seed; sha256 keeps it platform-independent."""
    digest = hashlib.sha256(f"{base_seed}:{node_id}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def train_context(d: Dataset, g: DependencyGraph, cfg: PipelineConfig,
                  context: str = "default") -> ContextModels:
    diags = validate(g, d)
    if diags:
        raise GraphError("invalid graph: " + "; ".join(diags))
    row_index = {name: i for i, name in enumerate(d.row_names())}
    original = d.matrix()
    working = original.copy()
    split = split_indices(d.n_columns, cfg.fractions, cfg.seed)
    order = training_order(g)
    agent_set = set(order)
    models: dict[str, MlpModel] = {}
    reports: dict[str, TrainReport] = {}
    trained: set[str] = set()
    for a in order:
        upstream_agents = [nb.id for nb in g.in_neighbors(a) if nb.kind == "agent"]
        untrained = [u for u in upstream_agents if u not in trained]
        if untrained:  # training_order guarantees this never happens
            raise GraphError(f"agent {a!r} scheduled before its inputs {untrained}")
        in_rows = inputs_of(g, a)
        own_rows = [row_index[r] for r in g.node(a).rows]
        X = working[[row_index[r] for r in in_rows]].T
        Y = original[own_rows].T
        spec = MlpSpec(n_in=len(in_rows), n_hidden=cfg.hidden_overrides.get(a, cfg.n_hidden))
        tcfg = replace(cfg.train, seed=node_seed(cfg.seed, a))
        model, report = train(spec, X, Y, split, tcfg)
        models[a] = model
        reports[a] = report
        trained.add(a)
        if cfg.propagate_estimates:
            pred = forward_batch(model, X)
            if cfg.propagate_test:
                working[own_rows, :] = pred.T
            else:
                cols = list(split.train_idx) + list(split.val_idx)
                working[np.ix_(own_rows, cols)] = pred.T[:, cols]
    assert agent_set == set(models)
    return ContextModels(context, g, models, reports, split, cfg, final_matrix=working)


def predict_all(cm: ContextModels, features: Mapping[str, float]) -> dict[str, Point2]:
    """Evaluate every agent in training order, feeding predicted positions to
    downstream agents."""
    values = {str(k): float(v) for k, v in features.items()}
    out: dict[str, Point2] = {}
    for a in training_order(cm.graph):
        rows = inputs_of(cm.graph, a)
        missing = [r for r in rows if r not in values]
        if missing:
            raise InvariantViolation(f"agent {a!r}: missing feature rows {missing}")
        x = np.array([values[r] for r in rows])
        yx, yy = forward_batch(cm.models[a], x[None, :])[0]
        p = Point2(float(yx), float(yy))
        rx, ry = cm.graph.node(a).rows
        values[rx], values[ry] = p.x, p.y
        out[a] = p
    return out


def predict_matrix(cm: ContextModels, feature_rows: Mapping[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Batched ``predict_all`` over columns: row name -> (n_cols,) values in,
    agent id -> (n_cols, 2) predictions out."""
    values = {str(k): np.asarray(v, dtype=float) for k, v in feature_rows.items()}
    out: dict[str, np.ndarray] = {}
    for a in training_order(cm.graph):
        rows = inputs_of(cm.graph, a)
        missing = [r for r in rows if r not in values]
        if missing:
            raise InvariantViolation(f"agent {a!r}: missing feature rows {missing}")
        X = np.stack([values[r] for r in rows], axis=1)
        pred = forward_batch(cm.models[a], X)
        rx, ry = cm.graph.node(a).rows
        values[rx], values[ry] = pred[:, 0], pred[:, 1]
        out[a] = pred
    return out


@dataclass
class EvalResult:
    per_agent: dict[str, dict[str, float]]
    overall: dict[str, float]


def evaluate_columns(cm: ContextModels, d: Dataset, idx) -> EvalResult:
    """Execution-style evaluation on dataset columns: predictions chain through
    the graph from raw features only, then compare with demonstrated targets."""
    idx = list(idx)
    m = d.matrix()
    row_index = {name: i for i, name in enumerate(d.row_names())}
    feats = {name: m[row_index[name], idx] for name in d.feature_rows}
    preds = predict_matrix(cm, feats)
    per_agent: dict[str, dict[str, float]] = {}
    pooled: list[np.ndarray] = []
    for a, pred in preds.items():
        rx, ry = cm.graph.node(a).rows
        target = m[[row_index[rx], row_index[ry]]][:, idx].T
        dist = np.linalg.norm(target - pred, axis=1)
        pooled.append(dist)
        per_agent[a] = {
            "E": float(dist.mean()),
            "sse": float(((target - pred) ** 2).sum()),
            "max_error": float(dist.max()),
            "error_std": float(dist.std()),
        }
    alldist = np.concatenate(pooled)
    overall = {"E": float(alldist.mean()), "max_error": float(alldist.max()),
               "error_std": float(alldist.std()), "n": float(alldist.size)}
    return EvalResult(per_agent, overall)


def _jf(v: float):
    """JSON-safe float: non-finite becomes null."""
    v = float(v)
    return v if math.isfinite(v) else None


def _fj(v) -> float:
    return math.nan if v is None else float(v)


def report_to_json(r: TrainReport) -> dict:
    return {
        "epochs_run": r.epochs_run,
        "stop_reason": r.stop_reason,
        "train_sse": [_jf(v) for v in r.train_sse],
        "val_sse": [_jf(v) for v in r.val_sse],
        "test_E": _jf(r.test_E),
        "test_sse": _jf(r.test_sse),
        "test_max_error": _jf(r.test_max_error),
        "test_error_std": _jf(r.test_error_std),
    }


def bundle_to_json(cm: ContextModels) -> dict:
    return {
        "context": cm.context,
        "graph": graph_to_json(cm.graph),
        "models": {a: model_to_json(m) for a, m in cm.models.items()},
        "reports": {a: report_to_json(r) for a, r in cm.reports.items()},
        "split": {"train": list(cm.split.train_idx), "val": list(cm.split.val_idx),
                  "test": list(cm.split.test_idx), "seed": cm.split.seed},
        "config": {
            "fractions": list(cm.config.fractions),
            "n_hidden": cm.config.n_hidden,
            "hidden_overrides": dict(cm.config.hidden_overrides),
            "propagate_estimates": cm.config.propagate_estimates,
            "propagate_test": cm.config.propagate_test,
            "seed": cm.config.seed,
            "train": {
                "max_epochs": cm.config.train.max_epochs,
                "mu0": cm.config.train.mu0,
                "mu_up": cm.config.train.mu_up,
                "mu_down": cm.config.train.mu_down,
                "mu_max": cm.config.train.mu_max,
                "patience": cm.config.train.patience,
                "val_check_every": cm.config.train.val_check_every,
                "seed": cm.config.train.seed,
            },
        },
    }


def bundle_from_json(obj) -> ContextModels:
    graph = graph_from_json(obj["graph"])
    models = {a: model_from_json(m) for a, m in obj["models"].items()}
    reports = {}
    for a, r in obj.get("reports", {}).items():
        reports[a] = TrainReport(
            epochs_run=int(r["epochs_run"]),
            stop_reason=str(r["stop_reason"]),
            train_sse=[_fj(v) for v in r["train_sse"]],
            val_sse=[_fj(v) for v in r["val_sse"]],
            test_E=_fj(r["test_E"]),
            test_sse=_fj(r["test_sse"]),
            test_max_error=_fj(r["test_max_error"]),
            test_error_std=_fj(r["test_error_std"]),
        )
    sp = obj["split"]
    split = DataSplit(tuple(sp["train"]), tuple(sp["val"]), tuple(sp["test"]), int(sp["seed"]))
    c = obj["config"]
    cfg = PipelineConfig(
        train=TrainConfig(
            max_epochs=int(c["train"]["max_epochs"]),
            mu0=float(c["train"]["mu0"]),
            mu_up=float(c["train"]["mu_up"]),
            mu_down=float(c["train"]["mu_down"]),
            mu_max=float(c["train"]["mu_max"]),
            patience=int(c["train"]["patience"]),
            val_check_every=int(c["train"]["val_check_every"]),
            seed=int(c["train"]["seed"]),
        ),
        fractions=tuple(float(f) for f in c["fractions"]),
        n_hidden=int(c["n_hidden"]),
        hidden_overrides={k: int(v) for k, v in c.get("hidden_overrides", {}).items()},
        propagate_estimates=bool(c["propagate_estimates"]),
        propagate_test=bool(c["propagate_test"]),
        seed=int(c["seed"]),
    )
    return ContextModels(str(obj["context"]), graph, models, reports, split, cfg)


def save_bundle(path, cm: ContextModels) -> None:
    jsonio.write_canonical(path, bundle_to_json(cm), float_fmt=jsonio.format_exact)


def load_bundle(path) -> ContextModels:
    return bundle_from_json(jsonio.read_json(path))
