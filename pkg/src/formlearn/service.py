"""HTTP/JSON service over a project directory: dataset editing, asynchronous
training, prediction, assignment, and trace playback for the annotation UI.

Concurrency: one lock guards the project state; dataset mutations are applied
to a copy, validated, persisted atomically, then swapped in. Training jobs are
queued FIFO on a single background worker; while any job is queued or running
the dataset is read-only and mutations fail with a 409 ``busy`` error.
"""
from __future__ import annotations

import itertools
import queue
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .assignment import build_weights, scene_from_json, solve_assignment
from .contexts import context_set_to_json
from .errors import FormlearnError, InvariantViolation, NotFoundError, ParseError, api_code
from .geometry import Dataset, Point2, Snapshot, dataset_from_json, dataset_to_json
from .pipeline import ContextModels, PipelineConfig, predict_all, train_context
from .project import ProjectBundle
from . import jsonio


class ServiceBusy(FormlearnError):
    """A training job is reading the dataset; mutations are rejected."""


_STATUS_BY_CODE = {
    "bad_request": 400,
    "not_found": 404,
    "busy": 409,
    "invariant_violation": 422,
    "training_failed": 500,
    "io_error": 500,
}


@dataclass
class TrainJob:
    id: int
    context: str
    seed: int
    state: str = "queued"  # queued | running | done | failed
    error: str | None = None

    def as_json(self) -> dict:
        return {"id": self.id, "context": self.context, "seed": self.seed,
                "state": self.state, "error": self.error}


@dataclass
class ServiceState:
    pb: ProjectBundle
    dataset: Dataset
    models: dict[str, ContextModels] = field(default_factory=dict)
    jobs: list[TrainJob] = field(default_factory=list)
    pending: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)
    queue: "queue.Queue[TrainJob | None]" = field(default_factory=queue.Queue)
    ids: "itertools.count[int]" = field(default_factory=itertools.count)


def _snapshot_from_json(obj) -> Snapshot:
    try:
        feats = [float(v) for v in obj["features"]]
        targets = [Point2(float(t[0]), float(t[1])) for t in obj["targets"]]
    except InvariantViolation:
        raise
    except (KeyError, TypeError, IndexError, ValueError) as e:
        raise ParseError(f"malformed snapshot: {e!r}") from e
    return Snapshot(feats, targets)


def _worker(st: ServiceState) -> None:
    while True:
        job = st.queue.get()
        if job is None:
            return
        with st.lock:
            job.state = "running"
            d = st.dataset
        try:
            g = st.pb.load_graph(job.context)
            cm = train_context(d, g, PipelineConfig(seed=job.seed), context=job.context)
            with st.lock:
                st.pb.save_models(cm)
                st.models[job.context] = cm
                job.state = "done"
        except Exception as e:  # any failure must release the busy state
            with st.lock:
                job.state = "failed"
                job.error = f"{api_code(e)}: {e}"
        finally:
            with st.lock:
                st.pending -= 1


def _error_response(exc: Exception) -> JSONResponse:
    code = "busy" if isinstance(exc, ServiceBusy) else api_code(exc)
    return JSONResponse(
        status_code=_STATUS_BY_CODE.get(code, 422),
        content={"error": {"code": code, "message": str(exc)}},
    )


def create_app(pb: ProjectBundle) -> FastAPI:
    st = ServiceState(pb=pb, dataset=pb.load_dataset())
    for ctx in list(pb.models):
        st.models[ctx] = pb.load_models(ctx)
    threading.Thread(target=_worker, args=(st,), daemon=True).start()

    app = FastAPI(title="formlearn service")
    app.state.service = st

    @app.exception_handler(FormlearnError)
    def _domain_error(request: Request, exc: FormlearnError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    def _request_error(request: Request, exc: RequestValidationError):
        return _error_response(ParseError(str(exc)))

    def _mutate_dataset(mutate) -> dict:
        """Apply ``mutate`` to a copy of the snapshot list, validate, persist,
        then swap in; any failure leaves both memory and disk untouched."""
        with st.lock:
            if st.pending > 0:
                raise ServiceBusy("a training job is reading the dataset; retry when idle")
            d = st.dataset
            candidate = Dataset(d.field, list(d.feature_rows), list(d.agent_rows),
                                list(d.snapshots))
            mutate(candidate)
            candidate.validate()
            st.pb.save_dataset(candidate)
            st.dataset = candidate
            return {"snapshots": candidate.n_columns}

    @app.get("/api/project")
    def get_project():
        with st.lock:
            return {
                "schema_version": st.pb.schema_version,
                "dataset": {
                    "snapshots": st.dataset.n_columns,
                    "feature_rows": list(st.dataset.feature_rows),
                    "agent_rows": list(st.dataset.agent_rows),
                    "field": {"length": st.dataset.field.length,
                              "width": st.dataset.field.width},
                },
                "graphs": sorted(st.pb.graphs),
                "trained": sorted(st.models),
                "traces": sorted(st.pb.traces),
            }

    @app.get("/api/dataset")
    def get_dataset():
        with st.lock:
            return dataset_to_json(st.dataset)

    @app.put("/api/dataset")
    def put_dataset(payload: dict):
        d = dataset_from_json(payload)
        with st.lock:
            if st.pending > 0:
                raise ServiceBusy("a training job is reading the dataset; retry when idle")
            st.pb.save_dataset(d)
            st.dataset = d
            return {"snapshots": d.n_columns}

    @app.post("/api/dataset/snapshots")
    def post_snapshot(payload: dict):
        snap = _snapshot_from_json(payload)

        def mutate(d: Dataset):
            d.snapshots.append(snap)

        out = _mutate_dataset(mutate)
        out["index"] = out["snapshots"] - 1
        return out

    @app.put("/api/dataset/snapshots/{i}")
    def put_snapshot(i: int, payload: dict):
        snap = _snapshot_from_json(payload)

        def mutate(d: Dataset):
            if not 0 <= i < len(d.snapshots):
                raise NotFoundError(f"no snapshot {i}")
            d.snapshots[i] = snap

        out = _mutate_dataset(mutate)
        out["index"] = i
        return out

    @app.delete("/api/dataset/snapshots/{i}")
    def delete_snapshot(i: int):
        def mutate(d: Dataset):
            if not 0 <= i < len(d.snapshots):
                raise NotFoundError(f"no snapshot {i}")
            del d.snapshots[i]

        return _mutate_dataset(mutate)

    @app.get("/api/contexts")
    def get_contexts():
        with st.lock:
            cs = st.pb.load_contexts()
            return {
                "context_set": None if cs is None else context_set_to_json(cs),
                "graphs": sorted(st.pb.graphs),
                "trained": sorted(st.models),
            }

    @app.post("/api/train")
    def post_train(context: str | None = None, seed: int = 0):
        with st.lock:
            if context is None:
                if len(st.pb.graphs) == 1:
                    context = next(iter(st.pb.graphs))
                else:
                    raise ParseError("context query parameter required "
                                     f"(graphs: {sorted(st.pb.graphs)})")
            if context not in st.pb.graphs:
                raise NotFoundError(f"no dependency graph for context {context!r}")
            job = TrainJob(next(st.ids), context, seed)
            st.jobs.append(job)
            st.pending += 1
            st.queue.put(job)
            return {"job": job.id, "status": job.state}

    @app.get("/api/train/status")
    def train_status():
        with st.lock:
            return {"busy": st.pending > 0, "jobs": [j.as_json() for j in st.jobs]}

    @app.get("/api/predict")
    def predict(context: str, ball_x: float, ball_y: float):
        with st.lock:
            cm = st.models.get(context)
        if cm is None:
            raise NotFoundError(f"no trained models for context {context!r}")
        targets = predict_all(cm, {"ball_x": ball_x, "ball_y": ball_y})
        return {"context": context,
                "targets": {a: [p.x, p.y] for a, p in targets.items()}}

    @app.post("/api/assign")
    def assign(payload: dict):
        agents, positions, ball, goal, model = scene_from_json(payload)
        w = build_weights(agents, positions, model, ball, goal)
        res = solve_assignment(w)
        return {"pairs": {agents[i].id: positions[j].id for i, j in enumerate(res.pairs)},
                "total": res.total}

    @app.get("/api/trace/{run}")
    def get_trace(run: str):
        with st.lock:
            path = st.pb.trace_path(run)
        return jsonio.read_json(path)

    return app
