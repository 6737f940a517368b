"""Dependency graph over feature and agent nodes.

Edges run source -> dependent: the dependent agent's model reads the source
node's rows. Features are never dependents, so only agent->agent edges can
form cycles; a cycle is exactly the mutual-following situation that makes
positions unstable, and validation rejects it.

The training order is emitted in waves: each wave is the set of agents whose
agent prerequisites have all been emitted, sorted by node id. This is one
deterministic topological order among many; no caller may rely on more than
the edge-respecting property.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GraphError, ParseError
from .geometry import Dataset
from . import jsonio

NODE_KINDS = ("feature", "agent")


@dataclass(frozen=True)
class GraphNode:
    id: str
    kind: str
    rows: tuple[str, ...]


@dataclass
class DependencyGraph:
    nodes: list[GraphNode]
    edges: list[tuple[str, str]]

    def node(self, node_id: str) -> GraphNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise GraphError(f"unknown node {node_id!r}")

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def agent_ids(self) -> list[str]:
        return [n.id for n in self.nodes if n.kind == "agent"]

    def in_neighbors(self, node_id: str) -> list[GraphNode]:
        """Sources feeding ``node_id``, ordered by position in the node list."""
        sources = {s for s, t in self.edges if t == node_id}
        return [n for n in self.nodes if n.id in sources]


def find_cycle(g: DependencyGraph) -> list[str] | None:
    """Node ids on some directed cycle, or None. Works on invalid graphs too."""
    adj: dict[str, list[str]] = {n.id: [] for n in g.nodes}
    for s, t in g.edges:
        if s in adj and t in adj:
            adj[s].append(t)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in adj}
    parent: dict[str, str] = {}
    for root in adj:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(adj[root]))]
        color[root] = GRAY
        while stack:
            v, it = stack[-1]
            advanced = False
            for w in it:
                if color[w] == WHITE:
                    color[w] = GRAY
                    parent[w] = v
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
                if color[w] == GRAY:
                    cycle = [w, v]
                    u = v
                    while u != w:
                        u = parent[u]
                        cycle.append(u)
                    cycle.pop()
                    cycle.reverse()
                    return cycle
            if not advanced:
                color[v] = BLACK
                stack.pop()
    return None


def validate(g: DependencyGraph, d: Dataset) -> list[str]:
    """Diagnostics, empty iff the graph satisfies every invariant against ``d``."""
    diags: list[str] = []
    seen: set[str] = set()
    for n in g.nodes:
        if n.id in seen:
            diags.append(f"duplicate node id {n.id!r}")
        seen.add(n.id)
        if n.kind not in NODE_KINDS:
            diags.append(f"node {n.id!r}: unknown kind {n.kind!r}")
    known_rows = set(d.row_names())
    for n in g.nodes:
        if n.kind == "agent" and len(n.rows) != 2:
            diags.append(f"agent node {n.id!r} must own exactly 2 coordinate rows, has {len(n.rows)}")
        if n.kind == "feature" and len(n.rows) < 1:
            diags.append(f"feature node {n.id!r} owns no rows")
        for r in n.rows:
            if r not in known_rows:
                diags.append(f"node {n.id!r}: row {r!r} not present in dataset")
    ids = {n.id for n in g.nodes}
    for s, t in g.edges:
        if s not in ids:
            diags.append(f"edge ({s!r}, {t!r}): unknown source node")
            continue
        if t not in ids:
            diags.append(f"edge ({s!r}, {t!r}): unknown dependent node")
            continue
        if g.node(t).kind != "agent":
            diags.append(f"edge ({s!r}, {t!r}): dependent must be an agent node")
        if s == t:
            diags.append(f"edge ({s!r}, {t!r}): node depends on itself")
    targets = {t for _, t in g.edges}
    for n in g.nodes:
        if n.kind == "agent" and n.id not in targets:
            diags.append(f"agent node {n.id!r} has no inputs and cannot be trained")
    cycle = find_cycle(g)
    if cycle:
        diags.append("cycle through nodes: " + " -> ".join(cycle + [cycle[0]]))
    return diags


def training_order(g: DependencyGraph) -> list[str]:
    """Agent ids such that every agent follows all agents it depends on."""
    agents = set(g.agent_ids())
    prereq = {a: set() for a in agents}
    for s, t in g.edges:
        if s in agents and t in agents:
            prereq[t].add(s)
    order: list[str] = []
    done: set[str] = set()
    while len(done) < len(agents):
        wave = sorted(a for a in agents if a not in done and prereq[a] <= done)
        if not wave:
            raise GraphError("cycle among agent nodes, no training order exists")
        order.extend(wave)
        done.update(wave)
    return order


def inputs_of(g: DependencyGraph, agent_id: str) -> list[str]:
    """Dataset rows feeding an agent's model, in (node list, row) order."""
    node = g.node(agent_id)
    if node.kind != "agent":
        raise GraphError(f"{agent_id!r} is not an agent node")
    rows: list[str] = []
    for nb in g.in_neighbors(agent_id):
        rows.extend(nb.rows)
    if not rows:
        raise GraphError(f"agent node {agent_id!r} has no inputs")
    return rows


def graph_to_json(g: DependencyGraph) -> dict:
    return {
        "nodes": [{"id": n.id, "kind": n.kind, "rows": list(n.rows)} for n in g.nodes],
        "edges": [[s, t] for s, t in g.edges],
    }


def graph_from_json(obj) -> DependencyGraph:
    try:
        nodes = [
            GraphNode(str(n["id"]), str(n["kind"]), tuple(str(r) for r in n["rows"]))
            for n in obj["nodes"]
        ]
        edges = [(str(e[0]), str(e[1])) for e in obj["edges"]]
    except (KeyError, TypeError, IndexError) as e:
        raise ParseError(f"malformed graph document: {e!r}") from e
    return DependencyGraph(nodes, edges)


def load_graph(path) -> DependencyGraph:
    return graph_from_json(jsonio.read_json(path))


def save_graph(path, g: DependencyGraph) -> None:
    jsonio.write_canonical(path, graph_to_json(g))
