"""Learning multi-agent formation strategy from expert demonstrations:
context-gated, dependency-graph-structured models of per-agent target
positions, dynamic position assignment, and a deterministic evaluation
simulator."""

from .errors import (ArtifactError, FeatureError, FormlearnError, GraphError, InvariantViolation,
                     NotFoundError, ParseError, PredicateError, TrainingError)
from .geometry import (DataSplit, Dataset, FieldConfig, Point2, Snapshot, coordinate_rows,
                       load_dataset, save_dataset, split_dataset, split_indices)
from .features import AttributeFrame, FeatureRegistry, FeatureVector, History, extract
from .contexts import ContextSet, TransitionRule, eval_predicate, load_context_set, \
    save_context_set, step_context
from .depgraph import (DependencyGraph, GraphNode, find_cycle, inputs_of, load_graph, save_graph,
                       training_order)
from .mlp import (MlpModel, MlpSpec, TrainConfig, TrainReport, forward, forward_batch, metric_E,
                  metric_SSE, metric_max_error, train)
from .pipeline import (ContextModels, EvalResult, PipelineConfig, evaluate_columns, load_bundle,
                       predict_all, predict_matrix, save_bundle, train_context)
from .assignment import (AgentState, Assignment, CandidatePosition, FACTORS, LinearWeightModel,
                         PsoConfig, build_weights, pso_maximize, pso_tune, solve_assignment)
from .simulator import (ParametricFormationPolicy, RobustnessRow, ScenarioConfig, ScenarioTrace,
                        SmoothnessReport, observe_policy, robustness_sweep, run_scenario,
                        smoothness, uniform_ball_sampler)
from .project import ProjectBundle, init_project, load_project, validate_project

__version__ = "0.1.0"
