"""Context engine: one active context per team, stepped once per cycle.

Transition predicates are declared in JSON from a small library of named
threshold/region conditions plus boolean combinators. Among the eligible
rules leaving the active context, the highest priority fires; ties break by
declaration order; if none fire the active context is kept. At most one
transition happens per cycle (no chaining), which keeps traces auditable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import InvariantViolation, ParseError, PredicateError
from .features import FeatureVector
from . import jsonio

PREDICATE_OPS = {"lt", "le", "gt", "ge", "eq", "between", "and", "or", "not", "always"}


def validate_predicate(node) -> None:
    if not isinstance(node, dict) or "op" not in node:
        raise ParseError(f"predicate must be an object with an 'op' key, got {node!r}")
    op = node["op"]
    if op not in PREDICATE_OPS:
        raise ParseError(f"unknown predicate op {op!r}")
    if op in ("lt", "le", "gt", "ge", "eq"):
        if "feature" not in node or "value" not in node:
            raise ParseError(f"predicate op {op!r} needs 'feature' and 'value'")
    elif op == "between":
        if "feature" not in node or "lo" not in node or "hi" not in node:
            raise ParseError("predicate op 'between' needs 'feature', 'lo' and 'hi'")
    elif op in ("and", "or"):
        args = node.get("args")
        if not isinstance(args, list) or not args:
            raise ParseError(f"predicate op {op!r} needs a non-empty 'args' list")
        for sub in args:
            validate_predicate(sub)
    elif op == "not":
        if "arg" not in node:
            raise ParseError("predicate op 'not' needs 'arg'")
        validate_predicate(node["arg"])


def predicate_features(node) -> set[str]:
    """All feature names a predicate reads."""
    op = node["op"]
    if op in ("lt", "le", "gt", "ge", "eq", "between"):
        return {node["feature"]}
    if op in ("and", "or"):
        return set().union(*(predicate_features(a) for a in node["args"]))
    if op == "not":
        return predicate_features(node["arg"])
    return set()


def eval_predicate(node, features: Mapping[str, float]) -> bool:
    op = node["op"]
    if op == "always":
        return True
    if op in ("and", "or"):
        results = (eval_predicate(a, features) for a in node["args"])
        return all(results) if op == "and" else any(results)
    if op == "not":
        return not eval_predicate(node["arg"], features)
    name = node["feature"]
    if name not in features:
        raise PredicateError(f"predicate needs feature {name!r} which is missing")
    v = features[name]
    if op == "lt":
        return v < node["value"]
    if op == "le":
        return v <= node["value"]
    if op == "gt":
        return v > node["value"]
    if op == "ge":
        return v >= node["value"]
    if op == "eq":
        return v == node["value"]
    return node["lo"] <= v <= node["hi"]


@dataclass
class TransitionRule:
    src: str
    dst: str
    priority: int
    when: dict
    self_loop: bool = False


@dataclass
class ContextSet:
    contexts: list[str]
    initial: str
    rules: list[TransitionRule] = field(default_factory=list)

    def validate(self) -> None:
        if len(set(self.contexts)) != len(self.contexts):
            raise InvariantViolation("duplicate context names")
        if self.initial not in self.contexts:
            raise InvariantViolation(f"initial context {self.initial!r} not declared")
        for i, r in enumerate(self.rules):
            for endpoint in (r.src, r.dst):
                if endpoint not in self.contexts:
                    raise InvariantViolation(f"rule {i} references undeclared context {endpoint!r}")
            if r.src == r.dst and not r.self_loop:
                raise InvariantViolation(
                    f"rule {i}: self-loop on {r.src!r} requires an explicit self_loop flag")
            validate_predicate(r.when)

    def feature_names(self) -> set[str]:
        return set().union(*(predicate_features(r.when) for r in self.rules))


def step_context(cs: ContextSet, active: str, features) -> str:
    """Next active context given this cycle's features. Pure and deterministic."""
    if active not in cs.contexts:
        raise InvariantViolation(f"active context {active!r} not in context set")
    if isinstance(features, FeatureVector):
        features = features.as_map()
    fired = None
    for rule in cs.rules:  # declaration order breaks priority ties
        if rule.src != active:
            continue
        if eval_predicate(rule.when, features):
            if fired is None or rule.priority > fired.priority:
                fired = rule
    return fired.dst if fired is not None else active


def context_set_to_json(cs: ContextSet) -> dict:
    rules = []
    for r in cs.rules:
        obj = {"from": r.src, "to": r.dst, "priority": r.priority, "when": r.when}
        if r.self_loop:
            obj["self_loop"] = True
        rules.append(obj)
    return {"contexts": list(cs.contexts), "initial": cs.initial, "rules": rules}


def context_set_from_json(obj) -> ContextSet:
    try:
        contexts = [str(c) for c in obj["contexts"]]
        initial = str(obj["initial"])
        raw_rules = obj.get("rules", [])
        rules = [
            TransitionRule(
                src=str(r["from"]),
                dst=str(r["to"]),
                priority=int(r.get("priority", 0)),
                when=r["when"],
                self_loop=bool(r.get("self_loop", False)),
            )
            for r in raw_rules
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed context set document: {e!r}") from e
    cs = ContextSet(contexts, initial, rules)
    cs.validate()
    return cs


def load_context_set(path) -> ContextSet:
    return context_set_from_json(jsonio.read_json(path))


def save_context_set(path, cs: ContextSet) -> None:
    cs.validate()
    jsonio.write_canonical(path, context_set_to_json(cs))
