"""Skill graph values: structural validation, ordering, diffing,
granularity condensation, and the DOT/JSON exporters.

Graphs are immutable. Nodes and edges are stored in canonical order
(node id; then edge parent, child, flavor) so equal graphs serialize to
identical bytes.
"""

from __future__ import annotations

import enum
import heapq
import json
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping

from .diagnostics import ReportCollector, SourceSpan, ValidationReport
from .errors import CondenseError, DiffError, GraphCycleError, GraphImportError
from .model import (
    LEAF_CATEGORIES,
    CategoryAdjacency,
    KnowledgeBase,
    SkillCategory,
    super_skill_depth,
)

__all__ = [
    "EdgeFlavor",
    "SkillNode",
    "SkillEdge",
    "Provenance",
    "SkillGraph",
    "GraphDiff",
    "validate_graph",
    "topological_order",
    "diff",
    "condense",
    "export_graph",
    "graph_to_dict",
    "import_graph",
    "GRAPH_SCHEMA",
    "CATEGORY_COLORS",
]

GRAPH_SCHEMA = "skillgraph/1"

# Fill colors by category for DOT output; the legend pairs behavioral
# with yellow, action orange, actuation red, planning light blue,
# perception green, data acquisition dark blue. system is outside the
# legend and renders gray.
CATEGORY_COLORS: dict[SkillCategory, str] = {
    SkillCategory.SYSTEM: "#ced4da",
    SkillCategory.BEHAVIORAL: "#ffd43b",
    SkillCategory.PLANNING: "#a5d8ff",
    SkillCategory.PERCEPTION: "#69db7c",
    SkillCategory.DATA_ACQUISITION: "#1864ab",
    SkillCategory.ACTION: "#ff922b",
    SkillCategory.ACTUATION: "#fa5252",
}


class EdgeFlavor(enum.Enum):
    REQUIRES = "requires"
    MAY_REQUIRE = "may_require"
    CONDITIONAL = "conditional"


# Stronger obligations win when condensation collapses parallel edges.
_FLAVOR_STRENGTH = {EdgeFlavor.REQUIRES: 0, EdgeFlavor.MAY_REQUIRE: 1, EdgeFlavor.CONDITIONAL: 2}


@dataclass(frozen=True, slots=True)
class SkillNode:
    id: str
    category: SkillCategory
    label: str
    depth: int  # 1-based position in the skill's super-skill chain


@dataclass(frozen=True, slots=True)
class SkillEdge:
    parent: str
    child: str
    flavor: EdgeFlavor

    def key(self) -> tuple[str, str, str]:
        return (self.parent, self.child, self.flavor.value)


@dataclass(frozen=True)
class Provenance:
    kb_fingerprint: str
    query: Mapping[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {"kb_fingerprint": self.kb_fingerprint, "query": dict(self.query)}


@dataclass(frozen=True)
class SkillGraph:
    nodes: tuple[SkillNode, ...]
    edges: tuple[SkillEdge, ...]
    root: str
    provenance: Provenance

    @staticmethod
    def build(
        nodes: Iterable[SkillNode], edges: Iterable[SkillEdge], root: str, provenance: Provenance
    ) -> "SkillGraph":
        """Normalize to canonical node/edge order."""
        return SkillGraph(
            nodes=tuple(sorted(nodes, key=lambda n: n.id)),
            edges=tuple(sorted(edges, key=SkillEdge.key)),
            root=root,
            provenance=provenance,
        )

    def node_ids(self) -> set[str]:
        return {n.id for n in self.nodes}

    def node(self, node_id: str) -> SkillNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def children(self, node_id: str) -> list[str]:
        return sorted(e.child for e in self.edges if e.parent == node_id)

    def same_structure(self, other: "SkillGraph") -> bool:
        """Equality over nodes/edges/root, ignoring provenance."""
        return self.nodes == other.nodes and self.edges == other.edges and self.root == other.root


@dataclass(frozen=True)
class GraphDiff:
    added_nodes: frozenset[str]
    removed_nodes: frozenset[str]
    added_edges: frozenset[tuple[str, str, str]]
    removed_edges: frozenset[tuple[str, str, str]]

    def is_empty(self) -> bool:
        return not (self.added_nodes or self.removed_nodes or self.added_edges or self.removed_edges)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": "skilldiff/1",
            "added_nodes": sorted(self.added_nodes),
            "removed_nodes": sorted(self.removed_nodes),
            "added_edges": [
                {"parent": p, "child": c, "flavor": f} for p, c, f in sorted(self.added_edges)
            ],
            "removed_edges": [
                {"parent": p, "child": c, "flavor": f} for p, c, f in sorted(self.removed_edges)
            ],
        }


# ---------------------------------------------------------------------------
# Validation


def validate_graph(graph: SkillGraph, policy: CategoryAdjacency) -> ValidationReport:
    """Structural rules: acyclic, adjacency-legal, leaf rule, root and
    reachability discipline. Extra zero-in-degree nodes and unreachable
    nodes are warnings (inference deliberately keeps determined-but-
    unconnected skills for expert review); everything else is an error.
    """
    rc = ReportCollector()
    here = SourceSpan("<graph>", 1, 1)
    ids = graph.node_ids()
    by_id = {n.id: n for n in graph.nodes}

    for edge in graph.edges:
        if edge.parent == edge.child:
            rc.error("E307_SELF_LOOP", f"self loop on '{edge.parent}'", here)
        for endpoint in (edge.parent, edge.child):
            if endpoint not in ids:
                rc.error("E306_EDGE_ENDPOINT", f"edge endpoint '{endpoint}' is not a node", here)

    edges = [e for e in graph.edges if e.parent in ids and e.child in ids and e.parent != e.child]

    try:
        topological_order(SkillGraph.build(graph.nodes, edges, graph.root, graph.provenance))
    except GraphCycleError as exc:
        rc.error("E301_CYCLE", str(exc), here)

    for edge in edges:
        parent, child = by_id[edge.parent], by_id[edge.child]
        if not policy.allows(parent.category, child.category):
            rc.error(
                "E302_ADJACENCY",
                f"edge {edge.parent} -> {edge.child} joins {parent.category.value} "
                f"to {child.category.value}, which the adjacency policy forbids",
                here,
            )

    out_degree = {nid: 0 for nid in ids}
    in_degree = {nid: 0 for nid in ids}
    for edge in edges:
        out_degree[edge.parent] += 1
        in_degree[edge.child] += 1

    for node in graph.nodes:
        if out_degree[node.id] == 0 and node.category not in LEAF_CATEGORIES:
            rc.error(
                "E303_LEAF_RULE",
                f"{node.category.value} node '{node.id}' has no children; only actuation "
                "and data_acquisition skills form leaves",
                here,
            )
        if out_degree[node.id] > 0 and node.category in LEAF_CATEGORIES:
            rc.error(
                "E303_LEAF_RULE",
                f"{node.category.value} node '{node.id}' must not have children",
                here,
            )

    if graph.root not in ids:
        rc.error("E305_ROOT_MISSING", f"root '{graph.root}' is not a node", here)
    else:
        if in_degree[graph.root] > 0:
            rc.error("E304_ROOT_IN_DEGREE", f"root '{graph.root}' has incoming edges", here)
        successors: dict[str, list[str]] = {nid: [] for nid in ids}
        for edge in edges:
            successors[edge.parent].append(edge.child)
        reached = {graph.root}
        frontier = [graph.root]
        while frontier:
            for child in successors[frontier.pop()]:
                if child not in reached:
                    reached.add(child)
                    frontier.append(child)
        for nid in sorted(ids - reached):
            rc.warning("W311_UNREACHABLE", f"node '{nid}' is not reachable from the root", here)
        for nid in sorted(ids):
            if in_degree[nid] == 0 and nid != graph.root:
                rc.warning("W310_EXTRA_ROOT", f"node '{nid}' has zero in-degree but is not the root", here)

    return rc.report()


def topological_order(graph: SkillGraph) -> list[str]:
    """Kahn's algorithm with a deterministic tie-break: among ready
    nodes, non-leaf categories go first, then canonical id order. Leaf
    nodes never unblock successors, so actuation and data_acquisition
    skills always end up at the tail, mirroring the root-to-leaves drop
    in abstraction.

    Raises :class:`GraphCycleError` listing one cycle when the graph is
    not acyclic.
    """
    ids = graph.node_ids()
    is_leaf = {n.id: n.category in LEAF_CATEGORIES for n in graph.nodes}
    in_degree = {nid: 0 for nid in ids}
    children: dict[str, list[str]] = {nid: [] for nid in ids}
    for edge in graph.edges:
        children[edge.parent].append(edge.child)
        in_degree[edge.child] += 1

    ready = [(is_leaf[nid], nid) for nid, deg in in_degree.items() if deg == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        _, nid = heapq.heappop(ready)
        order.append(nid)
        for child in children[nid]:
            in_degree[child] -= 1
            if in_degree[child] == 0:
                heapq.heappush(ready, (is_leaf[child], child))

    if len(order) != len(ids):
        # Every leftover node still has a leftover parent, so walking
        # parents from any of them must revisit a node: that loop,
        # reversed, is a forward cycle.
        remaining = {nid for nid, deg in in_degree.items() if deg > 0}
        parents: dict[str, list[str]] = {nid: [] for nid in remaining}
        for edge in graph.edges:
            if edge.parent in remaining and edge.child in remaining:
                parents[edge.child].append(edge.parent)
        walk = [min(remaining)]
        while True:
            nxt = min(parents[walk[-1]])
            if nxt in walk:
                loop = walk[walk.index(nxt) :]
                raise GraphCycleError([nxt] + loop[::-1])
            walk.append(nxt)
    return order


# ---------------------------------------------------------------------------
# Diff


def diff(a: SkillGraph, b: SkillGraph) -> GraphDiff:
    """Set difference of nodes and edge triples, a -> b.

    Both graphs must stem from the same knowledge base; diffing across
    KB versions has no well-defined identity and raises
    :class:`DiffError`.
    """
    if a.provenance.kb_fingerprint != b.provenance.kb_fingerprint:
        raise DiffError(
            "cannot diff graphs from different knowledge bases "
            f"({a.provenance.kb_fingerprint[:12]} vs {b.provenance.kb_fingerprint[:12]})"
        )
    nodes_a, nodes_b = a.node_ids(), b.node_ids()
    edges_a = {e.key() for e in a.edges}
    edges_b = {e.key() for e in b.edges}
    return GraphDiff(
        added_nodes=frozenset(nodes_b - nodes_a),
        removed_nodes=frozenset(nodes_a - nodes_b),
        added_edges=frozenset(edges_b - edges_a),
        removed_edges=frozenset(edges_a - edges_b),
    )


# ---------------------------------------------------------------------------
# Granularity condensation


def condense(graph: SkillGraph, kb: KnowledgeBase, level: int) -> SkillGraph:
    """Coarsen granularity by merging skills into superordinate skills.

    Level 0 disables condensation. At level k >= 1 every node deeper
    than k in its super-skill chain is replaced by its ancestor at depth
    k; edges are re-targeted, self-loops dropped, and parallel edges
    collapsed keeping the strongest flavor.
    """
    if level < 0:
        raise ValueError("granularity level must be >= 0")
    if level == 0:
        return graph

    def representative(skill_id: str) -> str:
        chain: list[str] = []
        current: str | None = skill_id
        while current is not None:
            chain.append(current)
            current = kb.skills[current].super_skill if current in kb.skills else None
            if current in chain:
                break
        # chain runs leaf-to-root; depth of chain[i] is len(chain) - i
        depth = len(chain)
        if depth <= level:
            return skill_id
        return chain[depth - level]

    rep: dict[str, str] = {}
    for node in graph.nodes:
        if node.id not in kb.skills:
            raise CondenseError(f"graph node '{node.id}' is not a skill in this KB", node.id)
        rep[node.id] = representative(node.id)

    merged_nodes: dict[str, SkillNode] = {}
    for node in graph.nodes:
        rid = rep[node.id]
        if rid not in merged_nodes:
            skill = kb.skills[rid]
            merged_nodes[rid] = SkillNode(
                id=rid,
                category=skill.category,
                label=skill.label,
                depth=super_skill_depth(kb, rid),
            )

    merged_edges: dict[tuple[str, str], EdgeFlavor] = {}
    for edge in graph.edges:
        parent, child = rep[edge.parent], rep[edge.child]
        if parent == child:
            continue
        key = (parent, child)
        current = merged_edges.get(key)
        if current is None or _FLAVOR_STRENGTH[edge.flavor] < _FLAVOR_STRENGTH[current]:
            merged_edges[key] = edge.flavor

    result = SkillGraph.build(
        nodes=merged_nodes.values(),
        edges=(SkillEdge(p, c, f) for (p, c), f in merged_edges.items()),
        root=rep[graph.root],
        provenance=replace(
            graph.provenance, query={**dict(graph.provenance.query), "granularity": level}
        ),
    )

    try:
        topological_order(result)
    except GraphCycleError as exc:
        culprit = next((nid for nid in exc.cycle if any(rep[s] == nid and s != nid for s in rep)), exc.cycle[0])
        raise CondenseError(
            f"condensing at level {level} creates a cycle through super-skill '{culprit}': {exc}",
            culprit,
        ) from exc
    return result


# ---------------------------------------------------------------------------
# Export / import


def graph_to_dict(graph: SkillGraph) -> dict[str, Any]:
    return {
        "schema": GRAPH_SCHEMA,
        "root": graph.root,
        "provenance": graph.provenance.to_dict(),
        "nodes": [
            {"id": n.id, "category": n.category.value, "label": n.label, "depth": n.depth}
            for n in graph.nodes
        ],
        "edges": [
            {"parent": e.parent, "child": e.child, "flavor": e.flavor.value} for e in graph.edges
        ],
    }


def _graph_to_json(graph: SkillGraph) -> str:
    return json.dumps(graph_to_dict(graph), indent=2, ensure_ascii=False) + "\n"


def _graph_to_dot(graph: SkillGraph) -> str:
    lines = [
        "digraph skill_graph {",
        "  rankdir=TB;",
        '  node [shape=box, style="filled,rounded", fontname="Helvetica"];',
    ]
    for node in graph.nodes:
        color = CATEGORY_COLORS[node.category]
        font = ', fontcolor="#ffffff"' if node.category is SkillCategory.DATA_ACQUISITION else ""
        lines.append(f'  "{node.id}" [label="{node.label}", fillcolor="{color}"{font}];')
    for edge in graph.edges:
        style = "" if edge.flavor is EdgeFlavor.REQUIRES else " [style=dashed]"
        lines.append(f'  "{edge.parent}" -> "{edge.child}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(graph: SkillGraph, format: str) -> str:
    """Deterministic text export; ``format`` is ``dot`` or ``json``."""
    if format == "json":
        return _graph_to_json(graph)
    if format == "dot":
        return _graph_to_dot(graph)
    raise ValueError(f"unknown export format {format!r}")


def _expect(value: Any, typ: type, pointer: str) -> Any:
    if not isinstance(value, typ):
        raise GraphImportError(f"expected {typ.__name__}, found {type(value).__name__}", pointer)
    return value


def _expect_key(obj: dict, key: str, typ: type, pointer: str) -> Any:
    if key not in obj:
        raise GraphImportError(f"missing key '{key}'", pointer)
    return _expect(obj[key], typ, f"{pointer}/{key}")


def import_graph(text: str) -> SkillGraph:
    """Inverse of the JSON export. Schema violations raise
    :class:`GraphImportError` with a JSON-pointer-style path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphImportError(f"not valid JSON: {exc.msg}", "") from exc
    _expect(doc, dict, "")
    schema = _expect_key(doc, "schema", str, "")
    if schema != GRAPH_SCHEMA:
        raise GraphImportError(f"unsupported schema '{schema}'", "/schema")
    root = _expect_key(doc, "root", str, "")
    prov_obj = _expect_key(doc, "provenance", dict, "")
    fingerprint = _expect_key(prov_obj, "kb_fingerprint", str, "/provenance")
    query = _expect_key(prov_obj, "query", dict, "/provenance")

    categories = {c.value: c for c in SkillCategory}
    flavors = {f.value: f for f in EdgeFlavor}

    nodes = []
    for i, raw in enumerate(_expect_key(doc, "nodes", list, "")):
        pointer = f"/nodes/{i}"
        obj = _expect(raw, dict, pointer)
        category = _expect_key(obj, "category", str, pointer)
        if category not in categories:
            raise GraphImportError(f"unknown category '{category}'", f"{pointer}/category")
        nodes.append(
            SkillNode(
                id=_expect_key(obj, "id", str, pointer),
                category=categories[category],
                label=_expect_key(obj, "label", str, pointer),
                depth=_expect_key(obj, "depth", int, pointer),
            )
        )

    edges = []
    for i, raw in enumerate(_expect_key(doc, "edges", list, "")):
        pointer = f"/edges/{i}"
        obj = _expect(raw, dict, pointer)
        flavor = _expect_key(obj, "flavor", str, pointer)
        if flavor not in flavors:
            raise GraphImportError(f"unknown edge flavor '{flavor}'", f"{pointer}/flavor")
        edges.append(
            SkillEdge(
                parent=_expect_key(obj, "parent", str, pointer),
                child=_expect_key(obj, "child", str, pointer),
                flavor=flavors[flavor],
            )
        )

    node_ids = {n.id for n in nodes}
    if len(node_ids) != len(nodes):
        raise GraphImportError("duplicate node ids", "/nodes")
    for i, edge in enumerate(edges):
        for end, value in (("parent", edge.parent), ("child", edge.child)):
            if value not in node_ids:
                raise GraphImportError(f"unknown node '{value}'", f"/edges/{i}/{end}")

    return SkillGraph.build(nodes, edges, root, Provenance(fingerprint, query))
