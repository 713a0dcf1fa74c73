"""Command-line frontend: KB validation, graph generation, ODD diffing,
and catalog listings. The batch path for CI and expert review.

Exit codes: 0 success, 1 validation/domain failure, 2 environment or
I/O failure. Output for a fixed (KB, query, flags) tuple is
byte-identical across runs; traces carry a timestamp only with
``--stamp``.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

from .diagnostics import ValidationReport
from .dsl import load_kb, KbLoadError, kb_fingerprint, parse_odd_query, validate_kb
from .errors import SkillforgeError
from .graph import condense, diff, export_graph, validate_graph
from .inference import build_query, infer_graph, trace_to_json, trace_to_markdown
from .model import KnowledgeBase, effective_determines

__all__ = ["main"]

KB_ENV_VAR = "SKILLFORGE_KB"


def _resolve_kb_path(args: argparse.Namespace) -> str:
    path = args.kb or os.environ.get(KB_ENV_VAR)
    if not path:
        raise FileNotFoundError(f"no knowledge base given; pass --kb or set {KB_ENV_VAR}")
    return path


def _load(args: argparse.Namespace) -> KnowledgeBase:
    return load_kb(_resolve_kb_path(args))


def _print_report(report: ValidationReport, as_json: bool) -> None:
    if as_json:
        sys.stdout.write(report.to_json())
    else:
        for line in report.render_lines():
            print(line)


def cmd_validate(args: argparse.Namespace) -> int:
    kb = _load(args)
    report = validate_kb(kb)
    _print_report(report, args.json)
    if not report.ok:
        return 1
    if args.strict and report.warnings:
        return 1
    if not args.json:
        print(f"ok: {len(kb.skills)} skills, {len(kb.scene_elements)} scene elements, "
              f"{len(kb.domains)} domains")
    return 0


def _parse_elements(spec: str) -> list[str]:
    """Comma-separated ids, or ``@file`` with one id per line."""
    if spec.startswith("@"):
        lines = Path(spec[1:]).read_text(encoding="utf-8").splitlines()
        return [line.strip() for line in lines if line.strip() and not line.lstrip().startswith("#")]
    return [token.strip() for token in spec.split(",") if token.strip()]


def cmd_generate(args: argparse.Namespace) -> int:
    if args.granularity < 0:
        raise SkillforgeError("granularity must be >= 0")
    kb = _load(args)
    query = build_query(kb, args.behavior, args.domain, _parse_elements(args.elements))
    graph, trace = infer_graph(kb, query)
    if args.granularity:
        graph = condense(graph, kb, args.granularity)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat() if args.stamp else None

    ext = "dot" if args.format == "dot" else "json"
    (out_dir / f"graph.{ext}").write_text(export_graph(graph, args.format), encoding="utf-8")
    (out_dir / "trace.json").write_text(trace_to_json(trace, stamp), encoding="utf-8")
    (out_dir / "trace.md").write_text(trace_to_markdown(trace, stamp), encoding="utf-8")

    for diagnostic in validate_graph(graph, kb.adjacency).warnings:
        print(diagnostic.render(), file=sys.stderr)
    print(f"nodes: {len(graph.nodes)}")
    print(f"edges: {len(graph.edges)}")
    return 0


def _query_from_file(kb: KnowledgeBase, path: str):
    text = Path(path).read_text(encoding="utf-8")
    parsed = parse_odd_query(text, origin=path)
    if isinstance(parsed, ValidationReport):
        for line in parsed.render_lines():
            print(line, file=sys.stderr)
        raise SkillforgeError(f"query file '{path}' failed to parse")
    behavior, domain, elements = parsed
    return build_query(kb, behavior, domain, elements)


def _render_diff(delta) -> str:
    if delta.is_empty():
        return "graphs are identical\n"
    lines = []
    for title, nodes in (("added nodes", sorted(delta.added_nodes)),
                         ("removed nodes", sorted(delta.removed_nodes))):
        lines.append(f"{title} ({len(nodes)}):")
        lines += [f"  {nid}" for nid in nodes]
    for title, edges in (("added edges", sorted(delta.added_edges)),
                         ("removed edges", sorted(delta.removed_edges))):
        lines.append(f"{title} ({len(edges)}):")
        lines += [f"  {p} -> {c} ({f})" for p, c, f in edges]
    return "\n".join(lines) + "\n"


def cmd_diff(args: argparse.Namespace) -> int:
    kb = _load(args)
    query_a = _query_from_file(kb, args.query_a)
    query_b = _query_from_file(kb, args.query_b)
    graph_a, _ = infer_graph(kb, query_a)
    graph_b, _ = infer_graph(kb, query_b)
    delta = diff(graph_a, graph_b)
    if args.json:
        sys.stdout.write(json.dumps(delta.to_dict(), indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(_render_diff(delta))
    if args.expect_empty and not delta.is_empty():
        return 1
    return 0


def cmd_list(args: argparse.Namespace) -> int:
    kb = _load(args)
    if args.kind == "domains":
        for did in kb.domain_ids():
            print(f"{did}  {kb.domains[did].label}")
    elif args.kind == "behaviors":
        for element in kb.behavior_elements():
            skills = ", ".join(effective_determines(kb, element))
            print(f"{element.id}  [{element.layer.value}]  {element.label}  determines: {skills}")
    elif args.kind == "elements":
        if args.domain and args.domain not in kb.domains:
            raise SkillforgeError(f"unknown domain '{args.domain}'")
        for eid in kb.element_ids():
            element = kb.scene_elements[eid]
            if args.domain and element.domains and args.domain not in element.domains:
                continue
            domains = ",".join(sorted(element.domains)) or "*"
            determines = ",".join(effective_determines(kb, element)) or "-"
            flag = "  behavior" if element.is_behavior else ""
            print(f"{eid}  [{element.layer.value}]  {element.label}  domains: {domains}  "
                  f"determines: {determines}{flag}")
    return 0


def cmd_fingerprint(args: argparse.Namespace) -> int:
    print(kb_fingerprint(_load(args)))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(_resolve_kb_path(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_kb_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kb", help=f"knowledge base file (default: ${KB_ENV_VAR})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skillforge",
                                     description="Construct skill graphs from a scene-and-skill knowledge base")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a knowledge base")
    _add_kb_flag(p)
    p.add_argument("--strict", action="store_true", help="warnings fail too")
    p.add_argument("--json", action="store_true", help="machine-readable diagnostics")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="infer a skill graph for a behavior and ODD selection")
    _add_kb_flag(p)
    p.add_argument("--behavior", required=True, help="behavior element id")
    p.add_argument("--domain", required=True, help="domain id")
    p.add_argument("--elements", default="", help="comma-separated element ids, or @file")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--granularity", type=int, default=0, help="condensation level, 0 = off")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--stamp", action="store_true", help="record a timestamp in the trace")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("diff", help="compare the graphs of two ODD selections")
    _add_kb_flag(p)
    p.add_argument("query_a", help=".odd query file (baseline)")
    p.add_argument("query_b", help=".odd query file (candidate)")
    p.add_argument("--json", action="store_true")
    p.add_argument("--expect-empty", action="store_true", help="exit 1 if the diff is not empty")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("list", help="list behaviors, domains, or scene elements")
    _add_kb_flag(p)
    p.add_argument("kind", choices=("behaviors", "domains", "elements"))
    p.add_argument("--domain", help="only elements available in this domain")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("fingerprint", help="print the KB content hash")
    _add_kb_flag(p)
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("serve", help="run the HTTP API")
    _add_kb_flag(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KbLoadError as exc:
        for line in exc.report.render_lines():
            print(line, file=sys.stderr)
        return 1
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SkillforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
