"""Automatic skill-graph construction.

Given a behavior, a domain, and a set of scene elements, the engine
populates an assertional box of skill instances and dependency edges:

1. the behavioral root skill is instantiated from the behavior element;
2. the behavior's base graph (the transitive closure of its existence
   obligations) is instantiated;
3. each selected scene element contributes the skills it determines,
   inherited determinations included, each followed by a recursive
   closure of the new skills' own obligations;
4. all declared dependency edges between present skills materialize;
   conditional edges only if both endpoints are present anyway.

A skill instance is added at most once; repeated determinations are
recorded as ``skip_duplicate`` trace steps. Every insertion is logged
with its cause, which makes the construction replayable and auditable.

Processing order is deterministic throughout: scene elements in
canonical id order, obligations depth-first in canonical id order,
edges in canonical (parent, child) order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .dsl import kb_fingerprint
from .errors import InferenceError, QueryError, ReplayError
from .graph import EdgeFlavor, Provenance, SkillEdge, SkillGraph, SkillNode
from .model import KnowledgeBase, SceneElement, SkillCategory, effective_determines, super_skill_depth

__all__ = [
    "OddQuery",
    "TraceStep",
    "ConstructionTrace",
    "build_query",
    "base_graph",
    "determined_skills",
    "infer_graph",
    "replay",
    "trace_to_dict",
    "trace_to_json",
    "trace_to_markdown",
    "TRACE_SCHEMA",
]

TRACE_SCHEMA = "skilltrace/1"

# Step actions.
INSTANTIATE = "instantiate_skill"
ADD_EDGE = "add_edge"
SKIP_DUPLICATE = "skip_duplicate"
MATERIALIZE_CONDITIONAL = "materialize_conditional"

# Cause kinds.
DETERMINED_BY = "determined_by"
NECESSITATED_BY = "necessitated_by"
REQUIRED_BY = "required_by"
BASE_GRAPH_OF = "base_graph_of"


@dataclass(frozen=True, slots=True)
class OddQuery:
    """A validated graph request: behavior element, domain, and the
    scene elements present in the ODD (canonical order)."""

    behavior: str
    domain: str
    selected_elements: tuple[str, ...]

    def summary(self) -> dict[str, object]:
        return {
            "behavior": self.behavior,
            "domain": self.domain,
            "elements": list(self.selected_elements),
        }


@dataclass(frozen=True, slots=True)
class TraceStep:
    """One construction event.

    ``subject`` is the skill id for node actions and the
    ``(parent, child, flavor)`` triple for edge actions. ``cause`` pairs
    a cause kind with the id of the scene element or skill responsible.
    """

    index: int
    action: str
    subject: str | tuple[str, str, str]
    cause: tuple[str, str]

    def to_dict(self) -> dict[str, object]:
        body: dict[str, object] = {"index": self.index, "action": self.action}
        if isinstance(self.subject, str):
            body["skill"] = self.subject
        else:
            parent, child, flavor = self.subject
            body["parent"] = parent
            body["child"] = child
            body["flavor"] = flavor
        body["cause"] = {"kind": self.cause[0], "ref": self.cause[1]}
        return body


@dataclass(frozen=True)
class ConstructionTrace:
    query: OddQuery
    steps: tuple[TraceStep, ...]
    kb_fingerprint: str


def build_query(
    kb: KnowledgeBase, behavior: str, domain: str, elements: Iterable[str]
) -> OddQuery:
    """Validate query tokens against the KB.

    Raises :class:`QueryError` for unknown ids, a non-behavior element
    in the behavior slot, or a selected element not available in the
    requested domain (element domain sets are closed-world: empty means
    domain-neutral).
    """
    if domain not in kb.domains:
        raise QueryError(f"unknown domain '{domain}'")
    if behavior not in kb.scene_elements:
        raise QueryError(f"unknown behavior element '{behavior}'")
    if not kb.scene_elements[behavior].is_behavior:
        raise QueryError(f"scene element '{behavior}' is not a behavior")
    selected = []
    for eid in elements:
        if eid not in kb.scene_elements:
            raise QueryError(f"unknown scene element '{eid}'")
        element = kb.scene_elements[eid]
        if element.domains and domain not in element.domains:
            raise QueryError(f"scene element '{eid}' does not occur in domain '{domain}'")
        selected.append(eid)
    return OddQuery(behavior=behavior, domain=domain, selected_elements=tuple(sorted(set(selected))))


def determined_skills(kb: KnowledgeBase, selection: Iterable[str]) -> tuple[str, ...]:
    """Union of effective determinations over a selection, deduplicated,
    canonical order."""
    out: set[str] = set()
    for eid in selection:
        if eid not in kb.scene_elements:
            raise QueryError(f"unknown scene element '{eid}'")
        out.update(effective_determines(kb, kb.scene_elements[eid]))
    return tuple(sorted(out))


class _Construction:
    """Mutable A-box: present skill instances plus the step log."""

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self.present: set[str] = set()
        self.steps: list[TraceStep] = []

    def log(self, action: str, subject: str | tuple[str, str, str], cause: tuple[str, str]) -> None:
        self.steps.append(TraceStep(len(self.steps), action, subject, cause))

    def instantiate(self, skill_id: str, cause: tuple[str, str]) -> bool:
        if skill_id in self.present:
            return False
        self.present.add(skill_id)
        self.log(INSTANTIATE, skill_id, cause)
        return True

    def close_obligations(self, skill_id: str, cause_override: tuple[str, str] | None = None) -> None:
        """Depth-first: instantiate every missing skill this one obliges
        to exist, recursively, targets in canonical order."""
        skill = self.kb.skills[skill_id]
        for target in skill.obligations():
            if target in self.present:
                continue
            if cause_override is not None:
                cause = cause_override
            elif target in skill.requires or target in skill.may_require:
                cause = (REQUIRED_BY, skill_id)
            else:
                cause = (NECESSITATED_BY, skill_id)
            self.instantiate(target, cause)
            self.close_obligations(target, cause_override)

    def materialize_edges(self) -> list[SkillEdge]:
        """All declared edges between present skills; conditional edges
        qualify because both endpoints exist via non-conditional causes
        (conditional relations never instantiate anything)."""
        plain: list[tuple[str, str, EdgeFlavor]] = []
        conditional: list[tuple[str, str, EdgeFlavor]] = []
        for parent_id in sorted(self.present):
            skill = self.kb.skills[parent_id]
            for flavor_name, target in skill.edge_relations():
                if target not in self.present:
                    continue
                flavor = EdgeFlavor(flavor_name)
                child = self.kb.skills[target]
                if not self.kb.adjacency.allows(skill.category, child.category):
                    raise InferenceError(
                        f"KB declares an illegal edge {parent_id} -> {target} "
                        f"({skill.category.value} to {child.category.value})",
                        trace_prefix=tuple(self.steps),
                    )
                bucket = conditional if flavor is EdgeFlavor.CONDITIONAL else plain
                bucket.append((parent_id, target, flavor))

        edges = []
        for parent_id, target, flavor in sorted(plain, key=lambda t: (t[0], t[1])):
            self.log(ADD_EDGE, (parent_id, target, flavor.value), (REQUIRED_BY, parent_id))
            edges.append(SkillEdge(parent_id, target, flavor))
        for parent_id, target, flavor in sorted(conditional, key=lambda t: (t[0], t[1])):
            self.log(MATERIALIZE_CONDITIONAL, (parent_id, target, flavor.value), (REQUIRED_BY, parent_id))
            edges.append(SkillEdge(parent_id, target, flavor))
        return edges

    def to_graph(self, root: str, provenance: Provenance, edges: list[SkillEdge]) -> SkillGraph:
        nodes = [
            SkillNode(
                id=sid,
                category=self.kb.skills[sid].category,
                label=self.kb.skills[sid].label,
                depth=super_skill_depth(self.kb, sid),
            )
            for sid in sorted(self.present)
        ]
        return SkillGraph.build(nodes, edges, root, provenance)


def base_graph(kb: KnowledgeBase, behavioral_skill: str) -> SkillGraph:
    """The ODD-independent foundation graph of a behavioral skill: the
    skill itself, the closure of its existence obligations, and all
    non-conditional edges among them."""
    if behavioral_skill not in kb.skills:
        raise QueryError(f"unknown skill '{behavioral_skill}'")
    if kb.skills[behavioral_skill].category is not SkillCategory.BEHAVIORAL:
        raise QueryError(f"skill '{behavioral_skill}' is not behavioral")
    construction = _Construction(kb)
    construction.instantiate(behavioral_skill, (BASE_GRAPH_OF, behavioral_skill))
    construction.close_obligations(behavioral_skill, cause_override=(BASE_GRAPH_OF, behavioral_skill))
    edges = construction.materialize_edges()
    provenance = Provenance(kb_fingerprint(kb), {"behavior_skill": behavioral_skill})
    return construction.to_graph(behavioral_skill, provenance, edges)


def _behavioral_root(kb: KnowledgeBase, element: SceneElement) -> str:
    behavioral = [
        sid
        for sid in effective_determines(kb, element)
        if kb.skills[sid].category is SkillCategory.BEHAVIORAL
    ]
    if len(behavioral) != 1:
        raise QueryError(
            f"behavior element '{element.id}' must determine exactly one behavioral skill, "
            f"found {len(behavioral)}"
        )
    return behavioral[0]


def infer_graph(kb: KnowledgeBase, query: OddQuery) -> tuple[SkillGraph, ConstructionTrace]:
    """Construct the skill graph for a behavior in a specific ODD,
    together with the trace that explains every insertion."""
    behavior_element = kb.scene_elements.get(query.behavior)
    if behavior_element is None or not behavior_element.is_behavior:
        raise QueryError(f"'{query.behavior}' is not a behavior element of this KB")
    root = _behavioral_root(kb, behavior_element)

    construction = _Construction(kb)
    construction.instantiate(root, (DETERMINED_BY, behavior_element.id))
    construction.close_obligations(root, cause_override=(BASE_GRAPH_OF, root))

    # The behavior element is processed like a selected element for any
    # non-root skills it determines; then the selection, canonical order.
    for eid in (behavior_element.id, *query.selected_elements):
        if eid not in kb.scene_elements:
            raise QueryError(f"unknown scene element '{eid}'")
        element = kb.scene_elements[eid]
        fresh: list[str] = []
        for skill_id in effective_determines(kb, element):
            if skill_id == root and eid == behavior_element.id:
                continue  # instantiated at step 0
            if construction.instantiate(skill_id, (DETERMINED_BY, eid)):
                fresh.append(skill_id)
            else:
                construction.log(SKIP_DUPLICATE, skill_id, (DETERMINED_BY, eid))
        for skill_id in fresh:
            construction.close_obligations(skill_id)

    edges = construction.materialize_edges()
    fingerprint = kb_fingerprint(kb)
    provenance = Provenance(fingerprint, query.summary())
    graph = construction.to_graph(root, provenance, edges)
    trace = ConstructionTrace(query=query, steps=tuple(construction.steps), kb_fingerprint=fingerprint)
    return graph, trace


# ---------------------------------------------------------------------------
# Replay


def _replay_fail(message: str, index: int | None = None) -> ReplayError:
    where = "" if index is None else f" at step {index}"
    return ReplayError(f"corrupt trace{where}: {message}", step_index=index)


def replay(kb: KnowledgeBase, trace: ConstructionTrace) -> SkillGraph:
    """Rebuild a graph by applying trace steps against the KB.

    Validates every step: fingerprints must match, ids must resolve,
    instantiations must be fresh, edges must be declared in the KB and
    join already-present skills. Any violation raises
    :class:`ReplayError` carrying the offending step index.
    """
    fingerprint = kb_fingerprint(kb)
    if trace.kb_fingerprint != fingerprint:
        raise _replay_fail(
            f"KB fingerprint mismatch ({trace.kb_fingerprint[:12]} vs {fingerprint[:12]})"
        )
    if not trace.steps:
        raise _replay_fail("empty step list; a valid trace instantiates the root at step 0")
    first = trace.steps[0]
    if first.action != INSTANTIATE or not isinstance(first.subject, str):
        raise _replay_fail("step 0 must instantiate the behavioral root", 0)
    if kb.skills.get(first.subject, None) is None or kb.skills[first.subject].category is not SkillCategory.BEHAVIORAL:
        raise _replay_fail(f"step 0 subject '{first.subject}' is not a behavioral skill", 0)

    present: set[str] = set()
    edges: list[SkillEdge] = []
    for i, step in enumerate(trace.steps):
        if step.index != i:
            raise _replay_fail(f"step index {step.index} is not contiguous", i)
        if step.action in (INSTANTIATE, SKIP_DUPLICATE):
            if not isinstance(step.subject, str):
                raise _replay_fail("node action with edge subject", i)
            if step.subject not in kb.skills:
                raise _replay_fail(f"unknown skill '{step.subject}'", i)
            if step.action == INSTANTIATE:
                if step.subject in present:
                    raise _replay_fail(f"skill '{step.subject}' instantiated twice", i)
                present.add(step.subject)
            elif step.subject not in present:
                raise _replay_fail(f"skip_duplicate for absent skill '{step.subject}'", i)
        elif step.action in (ADD_EDGE, MATERIALIZE_CONDITIONAL):
            if isinstance(step.subject, str):
                raise _replay_fail("edge action with node subject", i)
            parent, child, flavor_name = step.subject
            if parent not in present or child not in present:
                raise _replay_fail(f"edge {parent} -> {child} before both endpoints exist", i)
            if parent not in kb.skills:
                raise _replay_fail(f"unknown skill '{parent}'", i)
            declared = set(kb.skills[parent].edge_relations())
            if (flavor_name, child) not in declared:
                raise _replay_fail(f"edge {parent} -> {child} ({flavor_name}) is not declared in the KB", i)
            edges.append(SkillEdge(parent, child, EdgeFlavor(flavor_name)))
        else:
            raise _replay_fail(f"unknown action '{step.action}'", i)

    construction = _Construction(kb)
    construction.present = present
    root = first.subject
    assert isinstance(root, str)
    return construction.to_graph(root, Provenance(fingerprint, trace.query.summary()), edges)


# ---------------------------------------------------------------------------
# Trace export


def trace_to_dict(trace: ConstructionTrace, stamp: str | None = None) -> dict[str, object]:
    body: dict[str, object] = {
        "schema": TRACE_SCHEMA,
        "kb_fingerprint": trace.kb_fingerprint,
        "query": trace.query.summary(),
        "steps": [step.to_dict() for step in trace.steps],
    }
    if stamp is not None:
        body["generated_at"] = stamp
    return body


def trace_to_json(trace: ConstructionTrace, stamp: str | None = None) -> str:
    return json.dumps(trace_to_dict(trace, stamp), indent=2, ensure_ascii=False) + "\n"


_CAUSE_TEXT = {
    DETERMINED_BY: "determined by scene element",
    NECESSITATED_BY: "necessitated by skill",
    REQUIRED_BY: "required by skill",
    BASE_GRAPH_OF: "member of the base graph of",
}


def trace_to_markdown(trace: ConstructionTrace, stamp: str | None = None) -> str:
    """Human-readable insertion log for expert review."""
    q = trace.query
    lines = [
        "# Skill graph construction trace",
        "",
        f"- behavior: `{q.behavior}`",
        f"- domain: `{q.domain}`",
        f"- scene elements: {', '.join(f'`{e}`' for e in q.selected_elements) or '(none)'}",
        f"- kb fingerprint: `{trace.kb_fingerprint}`",
    ]
    if stamp is not None:
        lines.append(f"- generated at: {stamp}")
    lines += ["", "| # | action | subject | cause |", "|---|--------|---------|-------|"]
    for step in trace.steps:
        if isinstance(step.subject, str):
            subject = f"`{step.subject}`"
        else:
            parent, child, flavor = step.subject
            subject = f"`{parent}` -> `{child}` ({flavor})"
        kind, ref = step.cause
        lines.append(f"| {step.index} | {step.action} | {subject} | {_CAUSE_TEXT[kind]} `{ref}` |")
    return "\n".join(lines) + "\n"
