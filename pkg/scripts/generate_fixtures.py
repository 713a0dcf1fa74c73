#!/usr/bin/env python3
"""Regenerate the golden fixture files from the bundled knowledge base.

Run from the repository root:

    python3 scripts/generate_fixtures.py

CI regenerates these into a temporary directory and byte-compares them
against the committed copies, so only run this deliberately after a KB
or exporter change, and review the diff.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from skillforge import (  # noqa: E402
    build_query,
    condense,
    export_graph,
    infer_graph,
    load_kb,
    reference_kb_path,
)
from skillforge.inference import trace_to_json, trace_to_markdown  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

MARKINGS = ("dashed_lane_marking", "solid_lane_marking")


def write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path.relative_to(FIXTURES.parent)}")


def odd_file(behavior: str, domain: str, elements: tuple[str, ...]) -> str:
    body = [
        "odd 1",
        "query {",
        f"  behavior: {behavior};",
        f"  domain: {domain};",
        f"  elements: [{', '.join(elements)}];",
        "}",
    ]
    return "\n".join(body) + "\n"


def main() -> None:
    kb = load_kb(reference_kb_path())

    base_query = build_query(kb, "lane_keeping", "urban", ())
    markings_query = build_query(kb, "lane_keeping", "urban", MARKINGS)

    base_graph, base_trace = infer_graph(kb, base_query)
    markings_graph, markings_trace = infer_graph(kb, markings_query)
    condensed = condense(markings_graph, kb, 1)

    write(FIXTURES / "lane_keeping_base.json", export_graph(base_graph, "json"))
    write(FIXTURES / "lane_keeping_base.dot", export_graph(base_graph, "dot"))
    write(FIXTURES / "lane_keeping_base.trace.json", trace_to_json(base_trace))
    write(FIXTURES / "lane_keeping_markings.json", export_graph(markings_graph, "json"))
    write(FIXTURES / "lane_keeping_markings.dot", export_graph(markings_graph, "dot"))
    write(FIXTURES / "lane_keeping_markings.trace.json", trace_to_json(markings_trace))
    write(FIXTURES / "lane_keeping_markings.trace.md", trace_to_markdown(markings_trace))
    write(FIXTURES / "lane_keeping_markings_g1.json", export_graph(condensed, "json"))
    write(FIXTURES / "lane_keeping_markings_g1.dot", export_graph(condensed, "dot"))

    write(FIXTURES / "queries" / "base.odd", odd_file("lane_keeping", "urban", ()))
    write(FIXTURES / "queries" / "markings.odd", odd_file("lane_keeping", "urban", MARKINGS))


if __name__ == "__main__":
    main()
