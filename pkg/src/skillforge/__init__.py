"""Knowledge-base-driven construction of skill graphs for automated
vehicle behaviors: a declarative .skb knowledge base plus an ODD
selection in, a validated capability DAG with a replayable construction
trace out.
"""

from importlib import resources

from .diagnostics import ParseDiagnostic, SourceSpan, ValidationReport
from .dsl import (
    KbLoadError,
    kb_fingerprint,
    load_kb,
    parse_kb,
    parse_odd_query,
    serialize_kb,
    validate_kb,
)
from .errors import (
    CondenseError,
    DiffError,
    GraphCycleError,
    GraphImportError,
    InferenceError,
    QueryError,
    ReplayError,
    SkillforgeError,
)
from .graph import (
    EdgeFlavor,
    GraphDiff,
    Provenance,
    SkillEdge,
    SkillGraph,
    SkillNode,
    condense,
    diff,
    export_graph,
    import_graph,
    topological_order,
    validate_graph,
)
from .inference import (
    ConstructionTrace,
    OddQuery,
    TraceStep,
    base_graph,
    build_query,
    determined_skills,
    infer_graph,
    replay,
    trace_to_json,
    trace_to_markdown,
)
from .model import (
    CategoryAdjacency,
    Domain,
    KnowledgeBase,
    Layer,
    SceneElement,
    Skill,
    SkillCategory,
    allowed_child_categories,
    edge_is_legal,
    effective_determines,
)

__version__ = "0.1.0"


def reference_kb_path() -> str:
    """Filesystem path of the bundled lane-keeping knowledge base."""
    return str(resources.files(__package__) / "data" / "lanekeeping.skb")
