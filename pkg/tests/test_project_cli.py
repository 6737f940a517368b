"""Project manifest handling and the command-line workflow end to end."""
import json

import numpy as np
import pytest

from formlearn.cli import main
from formlearn.depgraph import DependencyGraph, GraphNode, save_graph
from formlearn.errors import ArtifactError, InvariantViolation, NotFoundError
from formlearn.geometry import coordinate_rows, load_dataset
from formlearn.jsonio import read_json, write_canonical
from formlearn.mlp import TrainConfig
from formlearn.pipeline import PipelineConfig, train_context
from formlearn.project import (
    MANIFEST_NAME,
    ProjectBundle,
    init_project,
    load_project,
    slug,
    validate_project,
)
from formlearn.synthetic import chain_graph, linear_chain_dataset, soccer_context_set


@pytest.fixture
def project(tmp_path):
    d = linear_chain_dataset(40, seed=1)
    init_project(tmp_path / "proj", d, None, {"default": chain_graph()})
    return tmp_path / "proj"


def _train_args(root, extra=()):
    return ["train", str(root), "--hidden", "3", "--max-epochs", "10", *extra]


@pytest.mark.parametrize("name,expected", [
    ("Dead Balls", "dead_balls"),
    ("Run Away", "run_away"),
    ("attack", "attack"),
    ("??", "unnamed"),
    ("A/B#1", "a_b_1"),
])
def test_slug(name, expected):
    assert slug(name) == expected


def test_init_and_load_round_trip(project):
    pb = load_project(project)
    assert pb.dataset_path == "dataset.json"
    assert pb.contexts_path is None
    assert pb.graphs == {"default": "graph_default.json"}
    assert pb.models == {} and pb.traces == {}
    d = pb.load_dataset()
    assert d.n_columns == 40
    g = pb.load_graph("default")
    assert g.agent_ids() == ["L", "F"]


def test_init_with_context_set(tmp_path):
    d = linear_chain_dataset(20, seed=0)
    cs = soccer_context_set()
    pb = init_project(tmp_path / "p", d, cs, {})
    loaded = load_project(tmp_path / "p")
    assert loaded.contexts_path == "contexts.json"
    assert loaded.load_contexts().contexts == cs.contexts
    assert pb.path("contexts.json").is_file()


def test_load_project_rejects_unknown_schema(project):
    manifest = read_json(project / MANIFEST_NAME)
    manifest["schema_version"] = 99
    write_canonical(project / MANIFEST_NAME, manifest)
    with pytest.raises(InvariantViolation, match="schema version"):
        load_project(project)


def test_load_project_reports_missing_artifacts(project):
    (project / "dataset.json").unlink()
    with pytest.raises(ArtifactError, match="missing files"):
        load_project(project)


def test_validate_project_clean(project):
    assert validate_project(load_project(project)) == []


def test_validate_project_flags_bad_graph(project):
    bad = DependencyGraph(
        nodes=[GraphNode("ball", "feature", ("ball_x", "ball_y")),
               GraphNode("Z", "agent", coordinate_rows("Z"))],
        edges=[("ball", "Z")],
    )
    save_graph(project / "graph_default.json", bad)
    diags = validate_project(load_project(project))
    assert diags and all(m.startswith("graph 'default':") for m in diags)
    assert any("not present in dataset" in m for m in diags)


def test_validate_project_flags_unknown_context(tmp_path):
    d = linear_chain_dataset(20, seed=0)
    init_project(tmp_path / "p", d, soccer_context_set(), {"Nope": chain_graph()})
    diags = validate_project(load_project(tmp_path / "p"))
    assert any("unknown context 'Nope'" in m for m in diags)


def test_save_models_updates_manifest(project):
    pb = load_project(project)
    cfg = PipelineConfig(train=TrainConfig(max_epochs=5), n_hidden=2, seed=0)
    cm = train_context(pb.load_dataset(), pb.load_graph("default"), cfg)
    pb.save_models(cm)
    again = load_project(project)
    assert again.models == {"default": "models_default.json"}
    restored = again.load_models("default")
    np.testing.assert_array_equal(restored.models["L"].w1, cm.models["L"].w1)
    with pytest.raises(NotFoundError, match="no trained models"):
        again.load_models("attack")
    with pytest.raises(NotFoundError, match="no trace"):
        again.trace_path("demo")


def test_cli_validate_clean_is_quiet(project, capsys):
    assert main(["validate", str(project)]) == 0
    assert capsys.readouterr().out == ""


def test_cli_validate_prints_diagnostics(project, capsys):
    g = chain_graph()
    cyclic = DependencyGraph(nodes=g.nodes, edges=g.edges + [("F", "L")])
    save_graph(project / "graph_default.json", cyclic)
    assert main(["validate", str(project)]) == 1
    assert "cycle through nodes" in capsys.readouterr().out


def test_cli_missing_project_is_io_failure(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nothing")]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error [")


def test_cli_train_then_eval(project, capsys):
    assert main(_train_args(project)) == 0
    out = capsys.readouterr().out
    assert "default/L: test E" in out and "default/F: test E" in out

    assert main(["eval", str(project)]) == 0
    out = capsys.readouterr().out
    assert "default/overall: E" in out

    report = project / "eval.json"
    assert main(["eval", str(project), "--split", "all", "--out", str(report)]) == 0
    blob = json.loads(report.read_text())
    assert set(blob["per_agent"]) == {"L", "F"}
    assert blob["overall"]["n"] == 2 * 40.0


def test_cli_eval_without_models_fails(project, capsys):
    assert main(["eval", str(project)]) == 1
    assert "not_found" in capsys.readouterr().err


def test_cli_simulate_before_train_fails(project, capsys):
    assert main(["simulate", str(project)]) == 1
    assert "not_found" in capsys.readouterr().err


def test_cli_simulate_is_deterministic(project, capsys, tmp_path):
    assert main(_train_args(project)) == 0
    t1, t2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
    svg = tmp_path / "run.svg"
    base = ["simulate", str(project), "--cycles", "20", "--noise", "0.2",
            "--chase", "--seed", "4"]
    assert main(base + ["--trace", str(t1), "--svg", str(svg), "--run", "demo"]) == 0
    assert main(base + ["--trace", str(t2)]) == 0
    assert t1.read_bytes() == t2.read_bytes()
    assert svg.stat().st_size > 0
    pb = load_project(project)
    assert pb.traces == {"demo": "trace_demo.json"}
    assert pb.trace_path("demo").is_file()
    out = capsys.readouterr().out
    assert "20 cycles" in out and "direction change" in out


def test_cli_rejects_malformed_point(project, capsys):
    main(_train_args(project))
    capsys.readouterr()
    assert main(["simulate", str(project), "--ball", "1;2"]) == 1
    assert "bad_request" in capsys.readouterr().err


def test_cli_assign_picks_nearest(tmp_path, capsys):
    scene = {
        "agents": [{"id": "a1", "x": 0.0, "y": 0.0}, {"id": "a2", "x": 10.0, "y": 0.0}],
        "positions": [{"id": "p1", "x": 1.0, "y": 0.0}, {"id": "p2", "x": 9.0, "y": 0.0}],
        "ball": [5.0, 0.0],
        "weights": {"agent_position_distance": 1.0},
    }
    sf = tmp_path / "scene.json"
    sf.write_text(json.dumps(scene))
    out = tmp_path / "assign.json"
    assert main(["assign", str(sf), "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["pairs"] == {"a1": "p1", "a2": "p2"}
    assert res["total"] == pytest.approx(-2.0)


def test_cli_pso_outputs_bounded_coefficients(tmp_path):
    out = tmp_path / "weights.json"
    assert main(["pso", "--scenes", "2", "--swarm", "4", "--iterations", "3",
                 "--lo", "0.0", "--hi", "2.0", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert len(res["coefficients"]) == 4
    assert all(0.0 <= v <= 2.0 for v in res["coefficients"].values())
    assert np.isfinite(res["fitness"])


def test_cli_observe_writes_dataset(tmp_path, capsys):
    out = tmp_path / "observed.json"
    assert main(["observe", "--samples", "12", "--seed", "2", "--out", str(out)]) == 0
    assert "wrote 12 observed snapshots" in capsys.readouterr().out
    d = load_dataset(out)
    assert len(d.snapshots) == 12
    assert len(d.agent_rows) == 11


def test_project_paths_are_relative_to_root(project):
    pb = load_project(project)
    assert pb.path("x.json") == project / "x.json"
    assert isinstance(pb, ProjectBundle)
