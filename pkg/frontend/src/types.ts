// Payload shapes mirrored from the /api/v1 JSON schemas. The UI never
// transforms graph payloads: what the API returns is what gets rendered.

export type SkillCategory =
  | "system"
  | "behavioral"
  | "planning"
  | "perception"
  | "data_acquisition"
  | "action"
  | "actuation";

export type EdgeFlavor = "requires" | "may_require" | "conditional";

export interface GraphNode {
  id: string;
  category: SkillCategory;
  label: string;
  depth: number;
}

export interface GraphEdge {
  parent: string;
  child: string;
  flavor: EdgeFlavor;
}

export interface GraphPayload {
  schema: "skillgraph/1";
  root: string;
  provenance: { kb_fingerprint: string; query: Record<string, unknown> };
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface TraceCause {
  kind: "determined_by" | "base_graph_of" | "required_by" | "necessitated_by";
  ref: string;
}

export interface TraceStep {
  index: number;
  action: "instantiate_skill" | "skip_duplicate" | "add_edge" | "materialize_conditional";
  skill?: string;
  parent?: string;
  child?: string;
  flavor?: EdgeFlavor;
  cause: TraceCause;
}

export interface TracePayload {
  schema: "skilltrace/1";
  kb_fingerprint: string;
  query: { behavior: string; domain: string; elements: string[] };
  steps: TraceStep[];
}

export interface GenerateResponse {
  graph: GraphPayload;
  trace: TracePayload;
  warnings: string[];
}

export interface DiffPayload {
  schema: "skilldiff/1";
  added_nodes: string[];
  removed_nodes: string[];
  added_edges: GraphEdge[];
  removed_edges: GraphEdge[];
}

export interface CatalogElement {
  id: string;
  label: string;
  parent: string | null;
  is_behavior: boolean;
  determines: string[];
}

export interface CatalogPayload {
  domain: string;
  layers: Record<string, CatalogElement[]>;
}

export interface MetaPayload {
  kb_fingerprint: string;
  counts: { skills: number; scene_elements: number; domains: number };
  format_versions: Record<string, string>;
  domains: { id: string; label: string }[];
  behaviors: { id: string; label: string }[];
}

export interface ApiErrorBody {
  status: number;
  code: string;
  message: string;
  details?: unknown;
}
