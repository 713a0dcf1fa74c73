"""Parser, validator, and serializer for the .skb knowledge-base format.

Grammar summary (full reference in docs/format.md):

    skb 1
    domain <id> { label: "..."; }
    skill <id> { label: "..."; category: <token>; requires: [ids]; ... }
    scene_element <id> [: <parent_id>] { layer: L1..L5; ... }
    adjacency { <category>: [categories]; ... }
    include "<relative path>"

Identifiers match ``[a-z][a-z0-9_]*``. Comments run from ``#`` to end of
line. Parsing is strict: unknown keys, duplicate ids, and unresolved
references are errors, never warnings.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

from .diagnostics import ReportCollector, SourceSpan, ValidationReport
from .model import (
    LEAF_CATEGORIES,
    CategoryAdjacency,
    Domain,
    KnowledgeBase,
    Layer,
    SceneElement,
    Skill,
    SkillCategory,
    edge_is_legal,
    effective_determines,
)

__all__ = [
    "parse_kb",
    "load_kb",
    "validate_kb",
    "serialize_kb",
    "kb_fingerprint",
    "parse_odd_query",
    "KbLoadError",
    "FORMAT_VERSION",
]

FORMAT_VERSION = 1
QUERY_FORMAT_VERSION = 1


class KbLoadError(Exception):
    """Raised by :func:`load_kb` when a file does not parse cleanly."""

    def __init__(self, report: ValidationReport):
        self.report = report
        first = report.errors[0] if report.errors else None
        super().__init__(first.render() if first else "knowledge base failed to load")


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # ident | layer | string | number | punct | eof
    value: str
    span: SourceSpan


_PUNCT = set("{}[]:;,")
_IDENT_START = set("abcdefghijklmnopqrstuvwxyz")
_IDENT_CONT = _IDENT_START | set("0123456789_")


class _LexError(Exception):
    pass


def _tokenize(text: str, file: str, rc: ReportCollector) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, i, n = 1, 1, 0, len(text)

    def span() -> SourceSpan:
        return SourceSpan(file, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in _PUNCT:
            tokens.append(_Token("punct", ch, span()))
            i += 1
            col += 1
        elif ch == '"':
            start = span()
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                rc.error("E001_SYNTAX", "unterminated string literal", start)
                raise _LexError
            tokens.append(_Token("string", text[i + 1 : j], start))
            col += j - i + 1
            i = j + 1
        elif ch == "L" and i + 1 < n and text[i + 1] in "12345":
            nxt = text[i + 2] if i + 2 < n else ""
            if nxt.isalnum() or nxt == "_":
                rc.error("E001_SYNTAX", f"invalid layer token at {text[i:i + 3]!r}", span())
                raise _LexError
            tokens.append(_Token("layer", text[i : i + 2], span()))
            i += 2
            col += 2
        elif ch in _IDENT_START:
            start = span()
            j = i
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            tokens.append(_Token("ident", text[i:j], start))
            col += j - i
            i = j
        elif ch.isdigit():
            start = span()
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("number", text[i:j], start))
            col += j - i
            i = j
        else:
            rc.error("E001_SYNTAX", f"unexpected character {ch!r}", span())
            raise _LexError
    tokens.append(_Token("eof", "", SourceSpan(file, line, col)))
    return tokens


# ---------------------------------------------------------------------------
# Parser (raw declarations; resolution happens in the builder)


@dataclass(frozen=True, slots=True)
class _Ref:
    id: str
    span: SourceSpan


# Tagged value: ("string", str) | ("ident", str) | ("layer", str)
# | ("bool", bool) | ("list", tuple[_Ref, ...])
_Value = tuple[str, object]


@dataclass(slots=True)
class _Block:
    kind: str  # domain | skill | scene_element | adjacency
    id: str
    id_span: SourceSpan
    parent: _Ref | None
    entries: dict[str, tuple[_Value, SourceSpan]] = field(default_factory=dict)


class _ParseAbort(Exception):
    pass


class _Parser:
    def __init__(self, tokens: list[_Token], rc: ReportCollector):
        self.tokens = tokens
        self.rc = rc
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token) -> _ParseAbort:
        self.rc.error("E001_SYNTAX", message, tok.span)
        return _ParseAbort()

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise self.fail(f"expected {what}, found {tok.value or 'end of input'!r}", tok)
        return tok

    def expect_punct(self, ch: str) -> _Token:
        tok = self.next()
        if tok.kind != "punct" or tok.value != ch:
            raise self.fail(f"expected {ch!r}, found {tok.value or 'end of input'!r}", tok)
        return tok

    def header(self, word: str, version: int) -> None:
        tok = self.next()
        if tok.kind != "ident" or tok.value != word:
            self.rc.error("E002_VERSION", f"file must start with the header '{word} {version}'", tok.span)
            raise _ParseAbort
        num = self.next()
        if num.kind != "number" or int(num.value) != version:
            self.rc.error("E002_VERSION", f"unsupported {word} format version {num.value!r}", num.span)
            raise _ParseAbort

    def value(self) -> tuple[_Value, SourceSpan]:
        tok = self.next()
        if tok.kind == "string":
            return ("string", tok.value), tok.span
        if tok.kind == "layer":
            return ("layer", tok.value), tok.span
        if tok.kind == "ident":
            if tok.value in ("true", "false"):
                return ("bool", tok.value == "true"), tok.span
            return ("ident", tok.value), tok.span
        if tok.kind == "punct" and tok.value == "[":
            refs: list[_Ref] = []
            if self.peek().kind == "punct" and self.peek().value == "]":
                self.next()
            else:
                while True:
                    ident = self.expect("ident", "an identifier")
                    refs.append(_Ref(ident.value, ident.span))
                    sep = self.next()
                    if sep.kind == "punct" and sep.value == ",":
                        continue
                    if sep.kind == "punct" and sep.value == "]":
                        break
                    raise self.fail("expected ',' or ']' in list", sep)
            return ("list", tuple(refs)), tok.span
        raise self.fail(f"expected a value, found {tok.value or 'end of input'!r}", tok)

    def block_body(self, block: _Block) -> None:
        self.expect_punct("{")
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "}":
                self.next()
                return
            key = self.expect("ident", "a key")
            self.expect_punct(":")
            value, vspan = self.value()
            self.expect_punct(";")
            if key.value in block.entries:
                self.rc.error("E008_DUPLICATE_KEY", f"key '{key.value}' given twice in this block", key.span)
            else:
                block.entries[key.value] = (value, vspan)

    def top_level(self) -> list[tuple[str, object]]:
        """Returns a list of ("block", _Block) and ("include", _Ref) items."""
        items: list[tuple[str, object]] = []
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                return items
            if tok.kind != "ident":
                raise self.fail(f"expected a declaration, found {tok.value!r}", tok)
            if tok.value == "include":
                self.next()
                path = self.expect("string", "a file path string")
                items.append(("include", _Ref(path.value, path.span)))
                continue
            if tok.value in ("domain", "skill", "scene_element"):
                kind = self.next().value
                ident = self.expect("ident", "an identifier")
                parent: _Ref | None = None
                if kind == "scene_element" and self.peek().kind == "punct" and self.peek().value == ":":
                    self.next()
                    ptok = self.expect("ident", "a parent identifier")
                    parent = _Ref(ptok.value, ptok.span)
                block = _Block(kind, ident.value, ident.span, parent)
                self.block_body(block)
                items.append(("block", block))
                continue
            if tok.value == "adjacency":
                self.next()
                block = _Block("adjacency", "adjacency", tok.span, None)
                self.block_body(block)
                items.append(("block", block))
                continue
            raise self.fail(f"unknown declaration '{tok.value}'", tok)


def _parse_file(text: str, origin: str, rc: ReportCollector, visited: set[str]) -> list[_Block]:
    """Parse one file, splicing includes depth-first."""
    try:
        tokens = _tokenize(text, origin, rc)
    except _LexError:
        return []
    if tokens[0].kind == "eof":
        return []
    parser = _Parser(tokens, rc)
    blocks: list[_Block] = []
    try:
        parser.header("skb", FORMAT_VERSION)
        items = parser.top_level()
    except _ParseAbort:
        return blocks
    for kind, item in items:
        if kind == "block":
            blocks.append(item)  # type: ignore[arg-type]
            continue
        ref: _Ref = item  # type: ignore[assignment]
        base = os.path.dirname(os.path.abspath(origin))
        target = os.path.normpath(os.path.join(base, ref.id))
        if not os.path.isfile(target):
            rc.error("E010_INCLUDE_NOT_FOUND", f"cannot read included file '{ref.id}'", ref.span)
            continue
        if target in visited:
            rc.error("E009_DUPLICATE_INCLUDE", f"file '{ref.id}' included more than once", ref.span)
            continue
        visited.add(target)
        with open(target, encoding="utf-8") as fh:
            blocks.extend(_parse_file(fh.read(), target, rc, visited))
    return blocks


# ---------------------------------------------------------------------------
# Builder: raw blocks -> resolved KnowledgeBase

_SKILL_KEYS = {"label", "category", "requires", "may_require", "conditional_edges", "necessitates", "super_skill"}
_SCENE_KEYS = {"label", "layer", "domains", "determines", "behavior", "min_scene"}
_DOMAIN_KEYS = {"label"}
_CATEGORY_TOKENS = {c.value: c for c in SkillCategory}
_LAYER_TOKENS = {layer.value: layer for layer in Layer}
_RELATION_KEYS = ("requires", "may_require", "conditional_edges")


def _take(
    block: _Block, key: str, kind: str, rc: ReportCollector, required: bool = False
) -> tuple[object | None, SourceSpan | None]:
    entry = block.entries.get(key)
    if entry is None:
        if required:
            rc.error("E015_MISSING_KEY", f"{block.kind} '{block.id}' is missing required key '{key}'", block.id_span)
        return None, None
    (vkind, value), span = entry
    if vkind != kind:
        rc.error("E001_SYNTAX", f"key '{key}' expects a {kind} value", span)
        return None, span
    return value, span


def _id_list(block: _Block, key: str, rc: ReportCollector) -> tuple[_Ref, ...]:
    value, _ = _take(block, key, "list", rc)
    if value is None:
        return ()
    refs: tuple[_Ref, ...] = value  # type: ignore[assignment]
    seen: set[str] = set()
    out: list[_Ref] = []
    for ref in refs:
        if ref.id in seen:
            rc.error("E012_DUPLICATE_LIST_ENTRY", f"'{ref.id}' listed twice under '{key}'", ref.span)
            continue
        seen.add(ref.id)
        out.append(ref)
    return tuple(out)


def _check_unknown_keys(block: _Block, allowed: set[str], rc: ReportCollector) -> None:
    for key, (_, _span) in block.entries.items():
        if key not in allowed:
            rc.error("E007_UNKNOWN_KEY", f"unknown key '{key}' in {block.kind} '{block.id}'", _span)


def _build_kb(blocks: list[_Block], rc: ReportCollector) -> KnowledgeBase:
    domains: dict[str, Domain] = {}
    skills: dict[str, Skill] = {}
    elements: dict[str, SceneElement] = {}
    adjacency = CategoryAdjacency()

    # Pass 1: declarations and per-block keys.
    skill_refs: dict[str, dict[str, tuple[_Ref, ...]]] = {}
    skill_super: dict[str, tuple[str, SourceSpan]] = {}
    elem_refs: dict[str, dict[str, tuple[_Ref, ...]]] = {}
    elem_parent: dict[str, _Ref] = {}
    adjacency_seen = False

    for block in blocks:
        if block.kind == "domain":
            _check_unknown_keys(block, _DOMAIN_KEYS, rc)
            label, _ = _take(block, "label", "string", rc, required=True)
            if block.id in domains:
                rc.error("E003_DUPLICATE_ID", f"domain '{block.id}' declared twice", block.id_span)
                continue
            domains[block.id] = Domain(block.id, str(label or block.id))

        elif block.kind == "skill":
            _check_unknown_keys(block, _SKILL_KEYS, rc)
            label, _ = _take(block, "label", "string", rc, required=True)
            cat_token, cat_span = _take(block, "category", "ident", rc, required=True)
            category = _CATEGORY_TOKENS.get(str(cat_token))
            if cat_token is not None and category is None:
                rc.error("E005_UNKNOWN_CATEGORY", f"unknown skill category '{cat_token}'", cat_span or block.id_span)
            if block.id in skills:
                rc.error("E003_DUPLICATE_ID", f"skill '{block.id}' declared twice", block.id_span)
                continue
            refs = {key: _id_list(block, key, rc) for key in (*_RELATION_KEYS, "necessitates")}
            seen_targets: dict[str, str] = {}
            for key in _RELATION_KEYS:
                for ref in refs[key]:
                    if ref.id in seen_targets:
                        rc.error(
                            "E013_CONFLICTING_RELATION",
                            f"'{ref.id}' appears under both '{seen_targets[ref.id]}' and '{key}'",
                            ref.span,
                        )
                    seen_targets[ref.id] = key
            super_val, super_span = _take(block, "super_skill", "ident", rc)
            if super_val is not None:
                skill_super[block.id] = (str(super_val), super_span or block.id_span)
            skill_refs[block.id] = refs
            skills[block.id] = Skill(
                id=block.id,
                label=str(label or block.id),
                category=category or SkillCategory.SYSTEM,
            )

        elif block.kind == "scene_element":
            _check_unknown_keys(block, _SCENE_KEYS, rc)
            label, _ = _take(block, "label", "string", rc, required=True)
            layer: Layer | None = None
            layer_entry = block.entries.get("layer")
            if layer_entry is None:
                rc.error(
                    "E015_MISSING_KEY",
                    f"scene_element '{block.id}' is missing required key 'layer'",
                    block.id_span,
                )
            else:
                (layer_kind, layer_value), layer_span = layer_entry
                if layer_kind == "layer":
                    layer = _LAYER_TOKENS[str(layer_value)]
                else:
                    rc.error("E006_UNKNOWN_LAYER", f"unknown layer {layer_value!r}", layer_span)
            behavior, _ = _take(block, "behavior", "bool", rc)
            if block.id in elements:
                rc.error("E003_DUPLICATE_ID", f"scene_element '{block.id}' declared twice", block.id_span)
                continue
            refs = {key: _id_list(block, key, rc) for key in ("domains", "determines", "min_scene")}
            if refs["min_scene"] and not behavior:
                ms_span = block.entries["min_scene"][1]
                rc.error(
                    "E014_MIN_SCENE_NON_BEHAVIOR",
                    f"min_scene is only valid on behavior elements, '{block.id}' is not one",
                    ms_span,
                )
            if block.parent is not None:
                elem_parent[block.id] = block.parent
            elem_refs[block.id] = refs
            elements[block.id] = SceneElement(
                id=block.id,
                label=str(label or block.id),
                layer=layer or Layer.L1,
                is_behavior=bool(behavior),
            )

        elif block.kind == "adjacency":
            if adjacency_seen:
                rc.error("E003_DUPLICATE_ID", "adjacency policy declared twice", block.id_span)
                continue
            adjacency_seen = True
            table: dict[SkillCategory, frozenset[SkillCategory]] = {}
            for key, ((vkind, value), span) in block.entries.items():
                parent_cat = _CATEGORY_TOKENS.get(key)
                if parent_cat is None:
                    rc.error("E005_UNKNOWN_CATEGORY", f"unknown skill category '{key}'", span)
                    continue
                if vkind != "list":
                    rc.error("E001_SYNTAX", f"key '{key}' expects a list value", span)
                    continue
                children: set[SkillCategory] = set()
                for ref in value:  # type: ignore[union-attr]
                    child_cat = _CATEGORY_TOKENS.get(ref.id)
                    if child_cat is None:
                        rc.error("E005_UNKNOWN_CATEGORY", f"unknown skill category '{ref.id}'", ref.span)
                        continue
                    children.add(child_cat)
                if parent_cat in LEAF_CATEGORIES and children:
                    rc.error(
                        "E011_LEAF_ADJACENCY",
                        f"'{key}' skills form graph leaves and admit no child categories",
                        span,
                    )
                    continue
                table[parent_cat] = frozenset(children)
            adjacency = CategoryAdjacency(table)

    # Pass 2: reference resolution.
    def resolve(refs: tuple[_Ref, ...], table: dict, what: str) -> tuple[str, ...]:
        out = []
        for ref in refs:
            if ref.id not in table:
                rc.error("E004_UNRESOLVED_REF", f"reference to undeclared {what} '{ref.id}'", ref.span)
            else:
                out.append(ref.id)
        return tuple(sorted(out))

    for sid, refs in skill_refs.items():
        resolved = {key: resolve(refs[key], skills, "skill") for key in refs}
        super_id: str | None = None
        if sid in skill_super:
            target, span = skill_super[sid]
            if target not in skills:
                rc.error("E004_UNRESOLVED_REF", f"reference to undeclared skill '{target}'", span)
            else:
                super_id = target
        base = skills[sid]
        skills[sid] = Skill(
            id=base.id,
            label=base.label,
            category=base.category,
            requires=resolved["requires"],
            may_require=resolved["may_require"],
            conditional_edges=resolved["conditional_edges"],
            necessitates=resolved["necessitates"],
            super_skill=super_id,
        )

    for eid, refs in elem_refs.items():
        parent_id: str | None = None
        if eid in elem_parent:
            ref = elem_parent[eid]
            if ref.id not in elements:
                rc.error("E004_UNRESOLVED_REF", f"reference to undeclared scene_element '{ref.id}'", ref.span)
            else:
                parent_id = ref.id
        base = elements[eid]
        elements[eid] = SceneElement(
            id=base.id,
            label=base.label,
            layer=base.layer,
            domains=frozenset(resolve(refs["domains"], domains, "domain")),
            parent=parent_id,
            determines=resolve(refs["determines"], skills, "skill"),
            is_behavior=base.is_behavior,
            min_scene=resolve(refs["min_scene"], elements, "scene_element"),
        )

    return KnowledgeBase(skills=skills, scene_elements=elements, domains=domains, adjacency=adjacency)


def parse_kb(text: str, origin: str = "<input>") -> KnowledgeBase | ValidationReport:
    """Parse .skb text into a resolved knowledge base.

    Returns a :class:`ValidationReport` instead when the input has
    syntax or resolution errors. Empty (or comment-only) input yields an
    empty knowledge base. ``origin`` names the input in diagnostics and
    anchors relative ``include`` paths.
    """
    rc = ReportCollector()
    visited = {os.path.normpath(os.path.abspath(origin))} if os.path.isfile(origin) else set()
    blocks = _parse_file(text, origin, rc, visited)
    if rc.has_errors:
        return rc.report()
    kb = _build_kb(blocks, rc)
    if rc.has_errors:
        return rc.report()
    return kb


def load_kb(path: str) -> KnowledgeBase:
    """Parse a .skb file, raising :class:`KbLoadError` on any error."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    result = parse_kb(text, origin=path)
    if isinstance(result, ValidationReport):
        raise KbLoadError(result)
    return result


# ---------------------------------------------------------------------------
# Semantic validation


def _find_cycle(nodes: list[str], successors) -> list[str] | None:
    """First cycle in a directed relation, as a closed node sequence."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GRAY
        stack.append(node)
        for succ in successors(node):
            if color.get(succ, BLACK) == GRAY:
                return stack[stack.index(succ) :] + [succ]
            if color.get(succ) == WHITE:
                found = visit(succ)
                if found:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for node in nodes:
        if color[node] == WHITE:
            found = visit(node)
            if found:
                return found
    return None


def validate_kb(kb: KnowledgeBase) -> ValidationReport:
    """Semantic checks over a structurally resolved knowledge base.

    Errors mark rule violations that would corrupt generated graphs;
    warnings mark KB gaps worth expert review. Pure: same KB, same
    report.
    """
    rc = ReportCollector()
    here = SourceSpan("<kb>", 1, 1)
    skill_ids = kb.skill_ids()

    # Dependency acyclicity over requires | may_require | conditional.
    def dep_successors(sid: str):
        skill = kb.skills[sid]
        return sorted(set(skill.requires) | set(skill.may_require) | set(skill.conditional_edges))

    cycle = _find_cycle(skill_ids, dep_successors)
    if cycle:
        rc.error("E101_DEPENDENCY_CYCLE", "dependency cycle: " + " -> ".join(cycle), here)

    for sid in skill_ids:
        skill = kb.skills[sid]
        if skill.category in LEAF_CATEGORIES:
            if skill.requires or skill.may_require or skill.conditional_edges:
                rc.error(
                    "E102_LEAF_OUT_RELATIONS",
                    f"{skill.category.value} skill '{sid}' declares dependencies; "
                    "actuation and data_acquisition skills depend on no other skills",
                    here,
                )
        elif not skill.requires and not skill.may_require:
            rc.error(
                "E110_NONLEAF_NO_DEPS",
                f"{skill.category.value} skill '{sid}' declares no requires/may_require target; "
                "it would appear as an illegal leaf in generated graphs",
                here,
            )
        for flavor, target in skill.edge_relations():
            child = kb.skills[target]
            if not edge_is_legal(kb.adjacency, skill, child):
                rc.error(
                    "E103_ADJACENCY",
                    f"edge {sid} -> {target} ({flavor}) joins {skill.category.value} "
                    f"to {child.category.value}, which the adjacency policy forbids",
                    here,
                )

    # Super-skill chains: acyclic, category-preserving.
    super_cycle = _find_cycle(
        skill_ids, lambda sid: [kb.skills[sid].super_skill] if kb.skills[sid].super_skill else []
    )
    if super_cycle:
        rc.error("E108_SUPER_CYCLE", "super_skill cycle: " + " -> ".join(super_cycle), here)
    for sid in skill_ids:
        skill = kb.skills[sid]
        if skill.super_skill and kb.skills[skill.super_skill].category is not skill.category:
            rc.error(
                "E109_SUPER_CATEGORY",
                f"super_skill of '{sid}' is '{skill.super_skill}' of a different category",
                here,
            )

    # Scene elements: parent chains, layers, behavior rules.
    element_ids = kb.element_ids()
    parent_cycle = _find_cycle(
        element_ids,
        lambda eid: [kb.scene_elements[eid].parent] if kb.scene_elements[eid].parent else [],
    )
    if parent_cycle:
        rc.error("E107_PARENT_CYCLE", "scene-element parent cycle: " + " -> ".join(parent_cycle), here)
    for eid in element_ids:
        elem = kb.scene_elements[eid]
        if elem.parent is not None:
            parent = kb.scene_elements[elem.parent]
            if parent.layer is not elem.layer:
                rc.error(
                    "E106_PARENT_LAYER",
                    f"scene_element '{eid}' ({elem.layer.value}) has parent "
                    f"'{elem.parent}' on different layer {parent.layer.value}",
                    here,
                )
        determined = effective_determines(kb, elem)
        if elem.is_behavior:
            if elem.layer is not Layer.L4:
                rc.error("E105_BEHAVIOR_LAYER", f"behavior element '{eid}' must be on layer L4", here)
            behavioral = [s for s in determined if kb.skills[s].category is SkillCategory.BEHAVIORAL]
            if len(behavioral) != 1:
                rc.error(
                    "E104_BEHAVIOR_DETERMINES",
                    f"behavior element '{eid}' must determine exactly one behavioral skill, "
                    f"found {len(behavioral)}",
                    here,
                )
        elif not determined:
            rc.warning(
                "W201_ELEMENT_NO_SKILLS",
                f"scene_element '{eid}' determines no skills (directly or by inheritance)",
                here,
            )

    # Reachability: every non-behavioral skill should be reachable from
    # some behavioral skill through obligations or conditional edges.
    reachable: set[str] = set()
    frontier = [sid for sid in skill_ids if kb.skills[sid].category is SkillCategory.BEHAVIORAL]
    reachable.update(frontier)
    while frontier:
        sid = frontier.pop()
        skill = kb.skills[sid]
        for target in set(skill.obligations()) | set(skill.conditional_edges):
            if target not in reachable:
                reachable.add(target)
                frontier.append(target)
    for sid in skill_ids:
        if sid not in reachable:
            rc.warning(
                "W202_UNREACHABLE_SKILL",
                f"skill '{sid}' is not reachable from any behavioral skill",
                here,
            )

    return rc.report()


# ---------------------------------------------------------------------------
# Canonical serialization


def _fmt_list(key: str, ids: tuple[str, ...] | list[str]) -> str:
    return f"  {key}: [{', '.join(ids)}];\n"


def serialize_kb(kb: KnowledgeBase) -> str:
    """Canonical single-file form: blocks and keys in fixed order, ids
    sorted, empty keys omitted. ``parse_kb(serialize_kb(kb))`` is
    structurally equal to ``kb``."""
    out = [f"skb {FORMAT_VERSION}\n"]

    if not kb.adjacency.is_default():
        out.append("\nadjacency {\n")
        for cat in sorted(SkillCategory, key=lambda c: c.value):
            children = kb.adjacency.allowed[cat]
            if children:
                out.append(_fmt_list(cat.value, sorted(c.value for c in children)))
        out.append("}\n")

    for did in kb.domain_ids():
        domain = kb.domains[did]
        out.append(f"\ndomain {did} {{\n")
        out.append(f'  label: "{domain.label}";\n')
        out.append("}\n")

    for sid in kb.skill_ids():
        skill = kb.skills[sid]
        out.append(f"\nskill {sid} {{\n")
        out.append(f'  label: "{skill.label}";\n')
        out.append(f"  category: {skill.category.value};\n")
        for key in ("requires", "may_require", "conditional_edges", "necessitates"):
            ids = getattr(skill, key)
            if ids:
                out.append(_fmt_list(key, sorted(ids)))
        if skill.super_skill:
            out.append(f"  super_skill: {skill.super_skill};\n")
        out.append("}\n")

    for eid in kb.element_ids():
        elem = kb.scene_elements[eid]
        head = f"\nscene_element {eid}"
        if elem.parent:
            head += f" : {elem.parent}"
        out.append(head + " {\n")
        out.append(f'  label: "{elem.label}";\n')
        out.append(f"  layer: {elem.layer.value};\n")
        if elem.domains:
            out.append(_fmt_list("domains", sorted(elem.domains)))
        if elem.is_behavior:
            out.append("  behavior: true;\n")
        if elem.determines:
            out.append(_fmt_list("determines", sorted(elem.determines)))
        if elem.min_scene:
            out.append(_fmt_list("min_scene", sorted(elem.min_scene)))
        out.append("}\n")

    return "".join(out)


def kb_fingerprint(kb: KnowledgeBase) -> str:
    """Content hash of the canonical serialization."""
    return hashlib.sha256(serialize_kb(kb).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# ODD query files (.odd)


def parse_odd_query(text: str, origin: str = "<query>") -> tuple[str, str, tuple[str, ...]] | ValidationReport:
    """Parse a versioned ODD selection file.

    Format::

        odd 1
        query {
          behavior: lane_keeping;
          domain: urban;
          elements: [dashed_lane_marking, solid_lane_marking];
        }

    Returns ``(behavior, domain, elements)`` with elements sorted, or a
    report on failure. Semantic checks against a KB happen later in
    :func:`skillforge.inference.build_query`.
    """
    rc = ReportCollector()
    try:
        tokens = _tokenize(text, origin, rc)
    except _LexError:
        return rc.report()
    parser = _Parser(tokens, rc)
    try:
        parser.header("odd", QUERY_FORMAT_VERSION)
        tok = parser.expect("ident", "'query'")
        if tok.value != "query":
            rc.error("E001_SYNTAX", f"expected 'query', found '{tok.value}'", tok.span)
            return rc.report()
        block = _Block("query", "query", tok.span, None)
        parser.block_body(block)
        end = parser.next()
        if end.kind != "eof":
            rc.error("E001_SYNTAX", f"unexpected trailing content '{end.value}'", end.span)
    except _ParseAbort:
        return rc.report()

    _check_unknown_keys(block, {"behavior", "domain", "elements"}, rc)
    behavior, _ = _take(block, "behavior", "ident", rc, required=True)
    domain, _ = _take(block, "domain", "ident", rc, required=True)
    elements = _id_list(block, "elements", rc)
    if rc.has_errors:
        return rc.report()
    return str(behavior), str(domain), tuple(sorted(ref.id for ref in elements))
