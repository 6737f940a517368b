"""Shared exception types."""


class FormlearnError(Exception):
    """Base class for every error this package raises on purpose."""


class ParseError(FormlearnError):
    """A file or JSON document could not be parsed into the expected structure."""


class ArtifactError(FormlearnError):
    """A referenced file is missing or unreadable (IO-level failure)."""


class InvariantViolation(FormlearnError):
    """A domain invariant does not hold (bad dataset, argument, or value)."""


class FeatureError(FormlearnError):
    """Feature extraction failed: unknown name, empty history, or all-unknown window."""


class PredicateError(FormlearnError):
    """A context transition predicate could not be evaluated."""


class GraphError(FormlearnError):
    """Operation attempted on an invalid dependency graph."""


class TrainingError(FormlearnError):
    """Training could not proceed (degenerate data, no accepted step)."""


class NotFoundError(FormlearnError):
    """A named resource (context, model bundle, trace, snapshot) does not exist."""


def api_code(exc: Exception) -> str:
    """Stable machine-readable code for an exception, shared by CLI and service."""
    if isinstance(exc, ParseError):
        return "bad_request"
    if isinstance(exc, NotFoundError):
        return "not_found"
    if isinstance(exc, TrainingError):
        return "training_failed"
    if isinstance(exc, ArtifactError):
        return "io_error"
    return "invariant_violation"
