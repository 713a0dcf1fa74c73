import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES
from kbgen import random_kb, random_query, random_query_pair
from oracle import apply_diff, naive_condense, reference_topological_sort
from skillforge import (
    CondenseError,
    DiffError,
    GraphCycleError,
    GraphImportError,
    condense,
    diff,
    export_graph,
    import_graph,
    infer_graph,
    topological_order,
    validate_graph,
)
from skillforge.graph import EdgeFlavor, Provenance, SkillEdge, SkillGraph, SkillNode
from skillforge.model import SkillCategory


def _graph(nodes, edges, root):
    return SkillGraph.build(
        nodes=[SkillNode(nid, cat, nid, 1) for nid, cat in nodes],
        edges=[SkillEdge(p, c, EdgeFlavor(f)) for p, c, f in edges],
        root=root,
        provenance=Provenance("test", {}),
    )


class TestValidateGraph:
    def test_markings_fixture_is_ok(self, kb, markings_graph):
        assert validate_graph(markings_graph, kb.adjacency).ok

    def test_actuation_to_perception_edge_is_named(self, kb):
        graph = _graph(
            [("root", SkillCategory.BEHAVIORAL), ("act", SkillCategory.ACTION),
             ("brake", SkillCategory.ACTUATION), ("see", SkillCategory.PERCEPTION),
             ("cam", SkillCategory.DATA_ACQUISITION)],
            [("root", "act", "requires"), ("act", "brake", "requires"),
             ("act", "see", "requires"), ("see", "cam", "requires"),
             ("brake", "see", "requires")],
            "root",
        )
        report = validate_graph(graph, kb.adjacency)
        errors = [d for d in report.errors if d.code in ("E302_ADJACENCY", "E303_LEAF_RULE")]
        assert any("brake -> see" in d.message for d in errors if d.code == "E302_ADJACENCY")

    def test_cycle_is_reported(self, kb):
        graph = _graph(
            [("a", SkillCategory.PERCEPTION), ("b", SkillCategory.PERCEPTION),
             ("cam", SkillCategory.DATA_ACQUISITION)],
            [("a", "b", "requires"), ("b", "a", "requires"), ("a", "cam", "requires")],
            "a",
        )
        report = validate_graph(graph, kb.adjacency)
        assert any(d.code == "E301_CYCLE" for d in report.errors)

    def test_missing_root_and_root_in_degree(self, kb):
        graph = _graph([("x", SkillCategory.ACTUATION)], [], "ghost")
        assert any(d.code == "E305_ROOT_MISSING" for d in validate_graph(graph, kb.adjacency).errors)

    def test_unreachable_node_is_a_warning_not_an_error(self, kb):
        graph = _graph(
            [("root", SkillCategory.BEHAVIORAL), ("act", SkillCategory.ACTION),
             ("brake", SkillCategory.ACTUATION), ("see", SkillCategory.PERCEPTION),
             ("cam", SkillCategory.DATA_ACQUISITION)],
            [("root", "act", "requires"), ("act", "brake", "requires"), ("see", "cam", "requires")],
            "root",
        )
        report = validate_graph(graph, kb.adjacency)
        assert report.ok
        codes = {d.code for d in report.warnings}
        assert codes == {"W311_UNREACHABLE", "W310_EXTRA_ROOT"}

    @pytest.mark.parametrize("mutation", ["back_edge", "illegal_edge", "strip_leaves", "into_root"])
    @pytest.mark.parametrize("seed", [3, 17, 40])
    def test_seeded_violations_are_caught(self, mutation, seed):
        rng = random.Random(seed)
        kb = random_kb(rng)
        query = random_query(rng, kb)
        graph, _ = infer_graph(kb, query)
        mutated = _mutate(graph, mutation, rng)
        if mutated is None:
            pytest.skip("graph too small for this mutation")
        assert not validate_graph(mutated, kb.adjacency).ok


def _mutate(graph, mutation, rng):
    """Break exactly one structural rule; None when not applicable."""
    nodes = list(graph.nodes)
    edges = list(graph.edges)
    if mutation == "back_edge":
        order = topological_order(graph)
        pairs = [(a, b) for i, a in enumerate(order) for b in order[:i]
                 if any(e.parent == b and e.child == a for e in edges)]
        if not pairs:
            return None
        child, parent = pairs[0]
        edges.append(SkillEdge(child, parent, EdgeFlavor.REQUIRES))
    elif mutation == "illegal_edge":
        leaves = [n.id for n in nodes if n.category in (SkillCategory.ACTUATION, SkillCategory.DATA_ACQUISITION)]
        others = [n.id for n in nodes if n.id not in leaves]
        if not leaves or not others:
            return None
        edges.append(SkillEdge(leaves[0], others[0], EdgeFlavor.REQUIRES))
    elif mutation == "strip_leaves":
        candidates = [n.id for n in nodes
                      if n.category not in (SkillCategory.ACTUATION, SkillCategory.DATA_ACQUISITION)
                      and any(e.parent == n.id for e in edges)]
        if not candidates:
            return None
        victim = rng.choice(candidates)
        edges = [e for e in edges if e.parent != victim]
    elif mutation == "into_root":
        sources = [n.id for n in nodes if n.id != graph.root
                   and n.category is SkillCategory.BEHAVIORAL]
        edges.append(SkillEdge(sources[0] if sources else nodes[-1].id, graph.root, EdgeFlavor.REQUIRES))
    return SkillGraph.build(nodes, edges, graph.root, graph.provenance)


class TestTopologicalOrder:
    def test_single_node(self):
        graph = _graph([("only", SkillCategory.ACTUATION)], [], "only")
        assert topological_order(graph) == ["only"]

    def test_base_fixture_order(self, kb, lane_keeping_base):
        order = topological_order(lane_keeping_base)
        assert order[0] == "lane_keeping"
        tail = {
            nid for nid in order[-6:]
        }
        leaf_ids = {
            n.id for n in lane_keeping_base.nodes
            if n.category in (SkillCategory.ACTUATION, SkillCategory.DATA_ACQUISITION)
        }
        assert tail == leaf_ids
        assert order == reference_topological_sort(lane_keeping_base)

    def test_two_runs_are_identical(self, lane_keeping_base):
        assert topological_order(lane_keeping_base) == topological_order(lane_keeping_base)

    def test_cycle_raises_with_node_sequence(self):
        graph = _graph(
            [("a", SkillCategory.PERCEPTION), ("b", SkillCategory.PERCEPTION)],
            [("a", "b", "requires"), ("b", "a", "requires")],
            "a",
        )
        with pytest.raises(GraphCycleError) as excinfo:
            topological_order(graph)
        cycle = excinfo.value.cycle
        assert cycle[0] == cycle[-1]
        assert set(cycle) == {"a", "b"}

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_length_and_edge_respecting(self, seed):
        rng = random.Random(seed)
        kb = random_kb(rng)
        graph, _ = infer_graph(kb, random_query(rng, kb))
        order = topological_order(graph)
        assert len(order) == len(graph.nodes)
        position = {nid: i for i, nid in enumerate(order)}
        for edge in graph.edges:
            assert position[edge.parent] < position[edge.child]
        assert order == reference_topological_sort(graph)


class TestDiff:
    def test_self_diff_is_empty(self, markings_graph):
        delta = diff(markings_graph, markings_graph)
        assert delta.is_empty()

    def test_base_to_markings_adds_three_skills(self, lane_keeping_base, markings_graph, kb):
        from skillforge import build_query

        base_infer, _ = infer_graph(kb, build_query(kb, "lane_keeping", "urban", []))
        delta = diff(base_infer, markings_graph)
        assert delta.added_nodes == {
            "perceive_lane_markings",
            "perceive_solid_lane_markings",
            "perceive_dashed_lane_markings",
        }
        assert not delta.removed_nodes
        assert not delta.removed_edges
        assert len(delta.added_edges) == 6

    def test_fingerprint_mismatch(self, markings_graph):
        alien = SkillGraph.build(markings_graph.nodes, markings_graph.edges, markings_graph.root,
                                 Provenance("elsewhere", {}))
        with pytest.raises(DiffError):
            diff(markings_graph, alien)

    def test_disjointness_invariant(self, kb):
        rng = random.Random(7)
        for _ in range(20):
            small, big = random_query_pair(rng, random_kb(rng))
            # regenerate kb per pair for variety
            kb2 = random_kb(rng)
            small, big = random_query_pair(rng, kb2)
            a, _ = infer_graph(kb2, small)
            b, _ = infer_graph(kb2, big)
            delta = diff(a, b)
            assert not delta.added_nodes & delta.removed_nodes
            assert not delta.added_edges & delta.removed_edges
            assert not delta.removed_nodes and not delta.removed_edges

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_apply_diff_is_an_exact_inverse(self, seed):
        from kbgen import selectable_elements
        from skillforge import build_query

        rng = random.Random(seed)
        kb = random_kb(rng)
        query_a = random_query(rng, kb)
        pool = selectable_elements(kb, query_a.domain)
        query_b = build_query(
            kb, query_a.behavior, query_a.domain, rng.sample(pool, rng.randint(0, len(pool)))
        )
        a, _ = infer_graph(kb, query_a)
        b, _ = infer_graph(kb, query_b)
        delta = diff(a, b)
        assert apply_diff(kb, a, delta, b.provenance) == b


class TestCondense:
    def test_level_zero_is_identity(self, kb, markings_graph):
        assert condense(markings_graph, kb, 0) is markings_graph

    def test_markings_fixture_condenses_variants_into_super_skill(self, kb, markings_graph):
        condensed = condense(markings_graph, kb, 1)
        assert "perceive_lane_markings" in condensed.node_ids()
        assert "perceive_solid_lane_markings" not in condensed.node_ids()
        assert "perceive_dashed_lane_markings" not in condensed.node_ids()
        # variant imaging edges merge into one requires edge
        edges = {e.key() for e in condensed.edges}
        assert ("perceive_lane_markings", "evaluate_imaging_sensor_data", "requires") in edges
        assert len(condensed.nodes) == len(markings_graph.nodes) - 2
        assert validate_graph(condensed, kb.adjacency).ok

    def test_condensed_keeps_stronger_flavor(self, kb, markings_graph):
        condensed = condense(markings_graph, kb, 1)
        flavors = {e.key()[:2]: e.flavor.value for e in condensed.edges}
        assert flavors[("perceive_lane_markings", "evaluate_imaging_sensor_data")] == "requires"

    def test_merge_cycle_is_reported_with_the_super_skill(self):
        from skillforge.dsl import parse_kb
        from skillforge.model import KnowledgeBase

        text = """skb 1
skill root { label: "Root"; category: behavioral; requires: [a, b2]; }
skill a { label: "A"; category: perception; requires: [b1]; }
skill b1 { label: "B1"; category: perception; requires: [cam]; super_skill: b; }
skill b2 { label: "B2"; category: perception; requires: [a]; super_skill: b; }
skill b { label: "B"; category: perception; requires: [cam]; }
skill cam { label: "Cam"; category: data_acquisition; }
"""
        kb = parse_kb(text)
        assert isinstance(kb, KnowledgeBase)
        graph = _graph(
            [("root", SkillCategory.BEHAVIORAL), ("a", SkillCategory.PERCEPTION),
             ("b1", SkillCategory.PERCEPTION), ("b2", SkillCategory.PERCEPTION),
             ("cam", SkillCategory.DATA_ACQUISITION)],
            [("root", "a", "requires"), ("root", "b2", "requires"), ("a", "b1", "requires"),
             ("b1", "cam", "requires"), ("b2", "a", "requires")],
            "root",
        )
        with pytest.raises(CondenseError) as excinfo:
            condense(graph, kb, 1)
        assert excinfo.value.super_skill == "b"

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 3))
    def test_idempotent_and_never_grows(self, seed, level):
        rng = random.Random(seed)
        kb = random_kb(rng)
        graph, _ = infer_graph(kb, random_query(rng, kb))
        condensed = condense(graph, kb, level)
        assert len(condensed.nodes) <= len(graph.nodes)
        assert len(condensed.edges) <= len(graph.edges)
        assert condense(condensed, kb, level) == condensed
        assert condensed.same_structure(naive_condense(graph, kb, level))


class TestExportImport:
    def test_single_node_dot(self):
        graph = _graph([("solo", SkillCategory.BEHAVIORAL)], [], "solo")
        dot = export_graph(graph, "dot")
        assert '"solo"' in dot and "#ffd43b" in dot

    def test_fixture_files_are_reproducible(self, kb, markings_graph):
        from skillforge import build_query

        base_inferred, _ = infer_graph(kb, build_query(kb, "lane_keeping", "urban", []))
        pairs = [
            (base_inferred, "lane_keeping_base"),
            (markings_graph, "lane_keeping_markings"),
            (condense(markings_graph, kb, 1), "lane_keeping_markings_g1"),
        ]
        for graph, stem in pairs:
            for fmt in ("json", "dot"):
                golden = (FIXTURES / f"{stem}.{fmt}").read_text(encoding="utf-8")
                assert export_graph(graph, fmt) == golden

    def test_import_inverts_export(self, markings_graph):
        assert import_graph(export_graph(markings_graph, "json")) == markings_graph

    def test_fixture_file_equals_fresh_inference(self, markings_graph):
        from_disk = import_graph((FIXTURES / "lane_keeping_markings.json").read_text(encoding="utf-8"))
        assert from_disk == markings_graph

    def test_truncated_document_reports_pointer(self, markings_graph):
        text = export_graph(markings_graph, "json")
        with pytest.raises(GraphImportError):
            import_graph(text[: len(text) // 2])
        import json

        doc = json.loads(text)
        del doc["nodes"][3]["category"]
        with pytest.raises(GraphImportError) as excinfo:
            import_graph(json.dumps(doc))
        assert excinfo.value.pointer == "/nodes/3"
        doc = json.loads(text)
        doc["edges"][0]["flavor"] = "sometimes"
        with pytest.raises(GraphImportError) as excinfo:
            import_graph(json.dumps(doc))
        assert excinfo.value.pointer == "/edges/0/flavor"

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_json_roundtrip_fixpoint_on_random_graphs(self, seed):
        rng = random.Random(seed)
        kb = random_kb(rng)
        graph, _ = infer_graph(kb, random_query(rng, kb))
        text = export_graph(graph, "json")
        again = import_graph(text)
        assert again == graph
        assert export_graph(again, "json") == text

    def test_export_determinism(self, markings_graph):
        assert export_graph(markings_graph, "dot") == export_graph(markings_graph, "dot")
        assert export_graph(markings_graph, "json") == export_graph(markings_graph, "json")
