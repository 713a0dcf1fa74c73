"""HTTP API over a knowledge base loaded once at startup.

Stateless by construction: every request runs a fresh inference against
the shared immutable KB, so concurrent identical requests produce
identical bodies. Graph payloads embed the same dictionaries the CLI
serializes, keeping API and CLI output byte-equal for the same query.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .dsl import kb_fingerprint, load_kb
from .errors import QueryError, SkillforgeError
from .graph import GRAPH_SCHEMA, SkillGraph, condense, diff, graph_to_dict, validate_graph
from .inference import TRACE_SCHEMA, ConstructionTrace, build_query, infer_graph, trace_to_dict
from .model import KnowledgeBase, Layer, effective_determines

__all__ = ["create_app"]

API_PREFIX = "/api/v1"

# Layers shown in the catalog; temporary manipulations (L3) and
# environmental conditions (L5) do not evoke skill requirements.
CATALOG_LAYERS = (Layer.L1, Layer.L2, Layer.L4)


class ApiError(Exception):
    """Error payload contract: status in {400, 404, 409, 422, 500},
    code from the documented catalog."""

    def __init__(self, status: int, code: str, message: str, details: Any = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details

    def body(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"status": self.status, "code": self.code, "message": self.message}
        if self.details is not None:
            payload["details"] = self.details
        return payload


class GraphRequest(BaseModel):
    behavior: str
    domain: str
    elements: list[str] = Field(default_factory=list)
    granularity: int = 0


class DiffRequest(BaseModel):
    query_a: GraphRequest
    query_b: GraphRequest


def _build_graph(kb: KnowledgeBase, request: GraphRequest) -> tuple[SkillGraph, ConstructionTrace]:
    try:
        query = build_query(kb, request.behavior, request.domain, request.elements)
        graph, trace = infer_graph(kb, query)
        if request.granularity:
            graph = condense(graph, kb, request.granularity)
    except (QueryError, ValueError) as exc:
        raise ApiError(422, "INVALID_QUERY", str(exc)) from exc
    return graph, trace


def create_app(kb_path: str, ui_dir: str | None = None) -> FastAPI:
    """Build the application around one immutable KB load."""
    kb = load_kb(kb_path)
    fingerprint = kb_fingerprint(kb)
    app = FastAPI(title="skillforge", version="1")

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def malformed_body_handler(_request: Request, exc: RequestValidationError) -> JSONResponse:
        error = ApiError(400, "MALFORMED_BODY", "request body does not match the schema",
                         details=exc.errors())
        return JSONResponse(status_code=error.status, content=error.body())

    @app.exception_handler(SkillforgeError)
    async def engine_error_handler(_request: Request, exc: SkillforgeError) -> JSONResponse:
        error = ApiError(500, "ENGINE_ERROR", str(exc))
        return JSONResponse(status_code=error.status, content=error.body())

    @app.get(API_PREFIX + "/meta")
    def meta() -> dict[str, Any]:
        return {
            "kb_fingerprint": fingerprint,
            "counts": {
                "skills": len(kb.skills),
                "scene_elements": len(kb.scene_elements),
                "domains": len(kb.domains),
            },
            "format_versions": {"kb": "skb/1", "graph": GRAPH_SCHEMA, "trace": TRACE_SCHEMA},
            "domains": [
                {"id": did, "label": kb.domains[did].label} for did in kb.domain_ids()
            ],
            "behaviors": [
                {"id": e.id, "label": e.label} for e in kb.behavior_elements()
            ],
        }

    @app.get(API_PREFIX + "/scene-elements")
    def scene_elements(domain: str) -> dict[str, Any]:
        if domain not in kb.domains:
            raise ApiError(404, "DOMAIN_NOT_FOUND", f"unknown domain '{domain}'")
        layers: dict[str, list[dict[str, Any]]] = {layer.value: [] for layer in CATALOG_LAYERS}
        for eid in kb.element_ids():
            element = kb.scene_elements[eid]
            if element.layer not in CATALOG_LAYERS:
                continue
            if element.domains and domain not in element.domains:
                continue
            layers[element.layer.value].append({
                "id": element.id,
                "label": element.label,
                "parent": element.parent,
                "is_behavior": element.is_behavior,
                "determines": list(effective_determines(kb, element)),
            })
        return {"domain": domain, "layers": layers}

    @app.post(API_PREFIX + "/graphs")
    def graphs(request: GraphRequest) -> dict[str, Any]:
        graph, trace = _build_graph(kb, request)
        warnings = [d.render() for d in validate_graph(graph, kb.adjacency).warnings]
        return {
            "graph": graph_to_dict(graph),
            "trace": trace_to_dict(trace),
            "warnings": warnings,
        }

    @app.post(API_PREFIX + "/graphs/diff")
    def graphs_diff(request: DiffRequest) -> dict[str, Any]:
        graph_a, _ = _build_graph(kb, request.query_a)
        graph_b, _ = _build_graph(kb, request.query_b)
        return diff(graph_a, graph_b).to_dict()

    if ui_dir is None:
        # src/skillforge/service.py -> repo root -> frontend/dist
        ui_dir = str(Path(__file__).resolve().parents[2] / "frontend" / "dist")
    if Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
