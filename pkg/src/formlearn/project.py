"""Project directory layout: a manifest tying together the dataset, the
context set, one dependency graph per context, and whatever model bundles and
traces have been produced so far. All artifacts are the canonical JSON files
the individual modules read and write; the manifest only names them.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .contexts import ContextSet, context_set_to_json, load_context_set
from .depgraph import DependencyGraph, load_graph, save_graph, validate as validate_graph
from .errors import ArtifactError, FormlearnError, InvariantViolation, NotFoundError
from .geometry import Dataset, load_dataset, save_dataset
from .pipeline import ContextModels, load_bundle, save_bundle
from . import jsonio

SCHEMA_VERSION = 1
MANIFEST_NAME = "project.json"


def slug(name: str) -> str:
    """Filesystem-safe tag for a context or run name."""
    s = re.sub(r"[^A-Za-z0-9_-]+", "_", name).strip("_").lower()
    return s or "unnamed"


@dataclass
class ProjectBundle:
    root: Path
    dataset_path: str = "dataset.json"
    contexts_path: str | None = "contexts.json"
    graphs: dict[str, str] = field(default_factory=dict)   # context -> file
    models: dict[str, str] = field(default_factory=dict)   # context -> file
    traces: dict[str, str] = field(default_factory=dict)   # run id -> file
    schema_version: int = SCHEMA_VERSION

    def path(self, rel: str) -> Path:
        return Path(self.root) / rel

    def load_dataset(self) -> Dataset:
        return load_dataset(self.path(self.dataset_path))

    def save_dataset(self, d: Dataset) -> None:
        save_dataset(self.path(self.dataset_path), d)

    def load_contexts(self) -> ContextSet | None:
        if self.contexts_path is None:
            return None
        return load_context_set(self.path(self.contexts_path))

    def load_graph(self, context: str) -> DependencyGraph:
        if context not in self.graphs:
            raise NotFoundError(f"project has no graph for context {context!r}")
        return load_graph(self.path(self.graphs[context]))

    def load_models(self, context: str) -> ContextModels:
        if context not in self.models:
            raise NotFoundError(f"no trained models for context {context!r}")
        return load_bundle(self.path(self.models[context]))

    def save_models(self, cm: ContextModels) -> None:
        rel = self.models.get(cm.context, f"models_{slug(cm.context)}.json")
        save_bundle(self.path(rel), cm)
        self.models[cm.context] = rel
        save_manifest(self)

    def trace_path(self, run: str) -> Path:
        if run not in self.traces:
            raise NotFoundError(f"no trace named {run!r}")
        return self.path(self.traces[run])

    def register_trace(self, run: str, rel: str) -> None:
        self.traces[run] = rel
        save_manifest(self)


def manifest_to_json(pb: ProjectBundle) -> dict:
    return {
        "schema_version": pb.schema_version,
        "dataset": pb.dataset_path,
        "contexts": pb.contexts_path,
        "graphs": dict(pb.graphs),
        "models": dict(pb.models),
        "traces": dict(pb.traces),
    }


def save_manifest(pb: ProjectBundle) -> None:
    jsonio.write_canonical(Path(pb.root) / MANIFEST_NAME, manifest_to_json(pb))


def load_project(root) -> ProjectBundle:
    root = Path(root)
    obj = jsonio.read_json(root / MANIFEST_NAME)
    version = int(obj.get("schema_version", -1))
    if version != SCHEMA_VERSION:
        raise InvariantViolation(
            f"unsupported project schema version {version} (supported: {SCHEMA_VERSION})")
    pb = ProjectBundle(
        root=root,
        dataset_path=str(obj["dataset"]),
        contexts_path=None if obj.get("contexts") is None else str(obj["contexts"]),
        graphs={str(k): str(v) for k, v in obj.get("graphs", {}).items()},
        models={str(k): str(v) for k, v in obj.get("models", {}).items()},
        traces={str(k): str(v) for k, v in obj.get("traces", {}).items()},
        schema_version=version,
    )
    referenced = [pb.dataset_path]
    if pb.contexts_path is not None:
        referenced.append(pb.contexts_path)
    referenced += list(pb.graphs.values()) + list(pb.models.values()) + list(pb.traces.values())
    missing = [rel for rel in referenced if not pb.path(rel).is_file()]
    if missing:
        raise ArtifactError(f"project references missing files: {sorted(missing)}")
    return pb


def init_project(root, dataset: Dataset, context_set: ContextSet | None,
                 graphs: Mapping[str, DependencyGraph]) -> ProjectBundle:
    """Create a fresh project directory with the given artifacts."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    pb = ProjectBundle(root=root)
    if context_set is None:
        pb.contexts_path = None
    pb.graphs = {ctx: f"graph_{slug(ctx)}.json" for ctx in graphs}
    save_dataset(pb.path(pb.dataset_path), dataset)
    if context_set is not None:
        jsonio.write_canonical(pb.path(pb.contexts_path), context_set_to_json(context_set))
    for ctx, g in graphs.items():
        save_graph(pb.path(pb.graphs[ctx]), g)
    save_manifest(pb)
    return pb


def validate_project(pb: ProjectBundle) -> list[str]:
    """Domain diagnostics (empty means clean). IO failures raise ArtifactError."""
    diags: list[str] = []
    try:
        d = pb.load_dataset()
    except ArtifactError:
        raise
    except FormlearnError as e:
        return [f"dataset: {e}"]
    cs = None
    if pb.contexts_path is not None:
        try:
            cs = pb.load_contexts()
        except ArtifactError:
            raise
        except FormlearnError as e:
            diags.append(f"contexts: {e}")
    if cs is not None:
        for ctx in pb.graphs:
            if ctx not in cs.contexts:
                diags.append(f"graph declared for unknown context {ctx!r}")
    for ctx in pb.graphs:
        try:
            g = pb.load_graph(ctx)
        except ArtifactError:
            raise
        except FormlearnError as e:
            diags.append(f"graph {ctx!r}: {e}")
            continue
        diags.extend(f"graph {ctx!r}: {msg}" for msg in validate_graph(g, d))
    return diags
