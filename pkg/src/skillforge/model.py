"""Core domain types: skills, scene elements, domains, and the category
adjacency policy that governs which dependency edges are legal.

All types are immutable after construction. They deliberately do not
enforce semantic rules (cycles, leaf rules, dangling references) so that
invalid knowledge bases can be represented and then rejected with proper
diagnostics by the validator in :mod:`skillforge.dsl`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping

__all__ = [
    "SkillCategory",
    "LEAF_CATEGORIES",
    "Layer",
    "Skill",
    "SceneElement",
    "Domain",
    "CategoryAdjacency",
    "KnowledgeBase",
    "allowed_child_categories",
    "edge_is_legal",
    "effective_determines",
    "super_skill_depth",
]


class SkillCategory(enum.Enum):
    """The seven roles a skill can play in a skill graph."""

    SYSTEM = "system"
    BEHAVIORAL = "behavioral"
    PLANNING = "planning"
    PERCEPTION = "perception"
    DATA_ACQUISITION = "data_acquisition"
    ACTION = "action"
    ACTUATION = "actuation"


# Categories that form the leaves of every skill graph: they depend on
# no other skills and must have zero out-degree wherever they appear.
LEAF_CATEGORIES = frozenset({SkillCategory.ACTUATION, SkillCategory.DATA_ACQUISITION})


class Layer(enum.Enum):
    """Scene-description layers: L1 road-level elements, L2 traffic
    infrastructure, L3 temporary manipulations, L4 objects, L5
    environmental conditions."""

    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"
    L5 = "L5"


@dataclass(frozen=True, slots=True)
class Skill:
    """A named vehicle capability.

    Relation fields hold skill ids in canonical (lexicographic) order:

    * ``requires`` -- strict dependencies; the target is always
      instantiated alongside this skill and a solid edge is drawn.
    * ``may_require`` -- optional/redundant dependencies; the target is
      still instantiated (all redundant solutions are modeled) but the
      edge renders dashed.
    * ``conditional_edges`` -- dependency edges that materialize only if
      the target skill is already present for an independent reason;
      they never force instantiation.
    * ``necessitates`` -- pure existence obligations carrying no edge.
    """

    id: str
    label: str
    category: SkillCategory
    requires: tuple[str, ...] = ()
    may_require: tuple[str, ...] = ()
    conditional_edges: tuple[str, ...] = ()
    necessitates: tuple[str, ...] = ()
    super_skill: str | None = None

    def edge_relations(self) -> Iterator[tuple[str, str]]:
        """Yield (flavor, target) pairs for all declared edge relations."""
        for target in self.requires:
            yield ("requires", target)
        for target in self.may_require:
            yield ("may_require", target)
        for target in self.conditional_edges:
            yield ("conditional", target)

    def obligations(self) -> tuple[str, ...]:
        """Targets whose existence this skill forces, canonical order."""
        return tuple(sorted(set(self.requires) | set(self.may_require) | set(self.necessitates)))


@dataclass(frozen=True, slots=True)
class SceneElement:
    """A building block of an ODD description.

    ``parent`` points to a more abstract element of the same layer;
    ``determines`` entries are inherited down the parent chain. Elements
    with ``is_behavior`` are L4 maneuvers standing for a behavior; their
    effective determines set must contain exactly one behavioral skill.
    ``min_scene`` is documentation only (the minimum scene a behavior
    presumes) and never feeds inference.
    """

    id: str
    label: str
    layer: Layer
    domains: frozenset[str] = frozenset()
    parent: str | None = None
    determines: tuple[str, ...] = ()
    is_behavior: bool = False
    min_scene: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class Domain:
    """A general operating domain such as highway or urban."""

    id: str
    label: str


def _default_adjacency() -> dict[SkillCategory, frozenset[SkillCategory]]:
    c = SkillCategory
    return {
        c.SYSTEM: frozenset({c.BEHAVIORAL}),
        c.BEHAVIORAL: frozenset({c.BEHAVIORAL, c.PLANNING, c.ACTION}),
        c.PLANNING: frozenset({c.PLANNING, c.PERCEPTION}),
        c.PERCEPTION: frozenset({c.PERCEPTION, c.DATA_ACQUISITION}),
        c.ACTION: frozenset({c.ACTION, c.PERCEPTION, c.ACTUATION}),
        c.DATA_ACQUISITION: frozenset(),
        c.ACTUATION: frozenset(),
    }


@dataclass(frozen=True)
class CategoryAdjacency:
    """Which child categories a dependency edge may point at, per parent
    category. Leaf categories always map to the empty set."""

    allowed: Mapping[SkillCategory, frozenset[SkillCategory]] = field(
        default_factory=_default_adjacency
    )

    def __post_init__(self) -> None:
        table = {cat: frozenset(self.allowed.get(cat, frozenset())) for cat in SkillCategory}
        for leaf in LEAF_CATEGORIES:
            if table[leaf]:
                raise ValueError(f"{leaf.value} skills cannot have child categories")
        object.__setattr__(self, "allowed", table)

    def allows(self, parent: SkillCategory, child: SkillCategory) -> bool:
        return child in self.allowed[parent]

    def is_default(self) -> bool:
        return dict(self.allowed) == _default_adjacency()


@dataclass(frozen=True)
class KnowledgeBase:
    """The T-box: all skill and scene-element concepts plus the
    adjacency policy. Mappings are keyed by id; iteration order is not
    significant, consumers sort ids where determinism matters."""

    skills: Mapping[str, Skill] = field(default_factory=dict)
    scene_elements: Mapping[str, SceneElement] = field(default_factory=dict)
    domains: Mapping[str, Domain] = field(default_factory=dict)
    adjacency: CategoryAdjacency = field(default_factory=CategoryAdjacency)

    def skill_ids(self) -> list[str]:
        return sorted(self.skills)

    def element_ids(self) -> list[str]:
        return sorted(self.scene_elements)

    def domain_ids(self) -> list[str]:
        return sorted(self.domains)

    def behavior_elements(self) -> list[SceneElement]:
        return [self.scene_elements[i] for i in self.element_ids() if self.scene_elements[i].is_behavior]


def allowed_child_categories(
    policy: CategoryAdjacency, parent: SkillCategory
) -> frozenset[SkillCategory]:
    """Permitted child categories for dependency edges from ``parent``."""
    return policy.allowed[parent]


def edge_is_legal(policy: CategoryAdjacency, parent: Skill, child: Skill) -> bool:
    """True iff an edge parent -> child respects the category hierarchy."""
    return policy.allows(parent.category, child.category)


def effective_determines(kb: KnowledgeBase, element: SceneElement) -> tuple[str, ...]:
    """Skills determined by ``element``, including everything inherited
    from its parent chain, deduplicated and in canonical id order.

    Guards against parent cycles (an invalid KB the validator reports
    separately) by stopping at the first repeated element.
    """
    skills: set[str] = set()
    seen: set[str] = set()
    current: SceneElement | None = element
    while current is not None and current.id not in seen:
        seen.add(current.id)
        skills.update(current.determines)
        current = kb.scene_elements.get(current.parent) if current.parent else None
    return tuple(sorted(skills))


def super_skill_depth(kb: KnowledgeBase, skill_id: str) -> int:
    """1-based depth of a skill in its super-skill chain.

    A skill without a super skill has depth 1; each ``super_skill`` hop
    adds one. Cycle-guarded for not-yet-validated KBs.
    """
    chain: list[str] = []
    seen: set[str] = set()
    current: str | None = skill_id
    while current is not None and current in kb.skills and current not in seen:
        seen.add(current)
        chain.append(current)
        current = kb.skills[current].super_skill
    return len(chain)
