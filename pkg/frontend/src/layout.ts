// Layered DAG layout: rows by longest path from the roots (so every
// edge points strictly downwards), columns by parent barycenter with an
// id tie-break for determinism.

import type { GraphEdge, GraphNode, GraphPayload } from "./types.js";

export interface PlacedNode {
  node: GraphNode;
  row: number;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface GraphLayout {
  width: number;
  height: number;
  nodes: Map<string, PlacedNode>;
}

export const NODE_HEIGHT = 34;
export const ROW_GAP = 56;
export const COLUMN_GAP = 24;
const CHAR_WIDTH = 7.2;
const NODE_PADDING = 18;
const MARGIN = 24;

export function nodeWidth(label: string): number {
  return Math.max(90, Math.ceil(label.length * CHAR_WIDTH) + 2 * NODE_PADDING);
}

export function assignRows(nodes: GraphNode[], edges: GraphEdge[]): Map<string, number> {
  const row = new Map<string, number>();
  const incoming = new Map<string, number>();
  const children = new Map<string, string[]>();
  for (const node of nodes) {
    incoming.set(node.id, 0);
    children.set(node.id, []);
    row.set(node.id, 0);
  }
  for (const edge of edges) {
    incoming.set(edge.child, (incoming.get(edge.child) ?? 0) + 1);
    children.get(edge.parent)?.push(edge.child);
  }
  const queue = nodes.filter((n) => incoming.get(n.id) === 0).map((n) => n.id);
  while (queue.length > 0) {
    const id = queue.shift() as string;
    for (const child of children.get(id) ?? []) {
      row.set(child, Math.max(row.get(child) ?? 0, (row.get(id) ?? 0) + 1));
      const left = (incoming.get(child) ?? 1) - 1;
      incoming.set(child, left);
      if (left === 0) {
        queue.push(child);
      }
    }
  }
  return row;
}

export function layoutGraph(graph: GraphPayload): GraphLayout {
  const rows = assignRows(graph.nodes, graph.edges);
  const byRow = new Map<number, GraphNode[]>();
  for (const node of graph.nodes) {
    const r = rows.get(node.id) ?? 0;
    if (!byRow.has(r)) {
      byRow.set(r, []);
    }
    (byRow.get(r) as GraphNode[]).push(node);
  }

  const parentsOf = new Map<string, string[]>();
  for (const edge of graph.edges) {
    if (!parentsOf.has(edge.child)) {
      parentsOf.set(edge.child, []);
    }
    (parentsOf.get(edge.child) as string[]).push(edge.parent);
  }

  const placed = new Map<string, PlacedNode>();
  let maxWidth = 0;
  const rowNumbers = [...byRow.keys()].sort((a, b) => a - b);
  for (const r of rowNumbers) {
    const members = byRow.get(r) as GraphNode[];
    members.sort((a, b) => {
      const centerOf = (id: string): number => {
        const parents = (parentsOf.get(id) ?? [])
          .map((p) => placed.get(p))
          .filter((p): p is PlacedNode => p !== undefined);
        if (parents.length === 0) {
          return Number.MAX_SAFE_INTEGER;
        }
        return parents.reduce((sum, p) => sum + p.x + p.width / 2, 0) / parents.length;
      };
      const diff = centerOf(a.id) - centerOf(b.id);
      return diff !== 0 ? diff : a.id.localeCompare(b.id);
    });
    let x = MARGIN;
    for (const node of members) {
      const width = nodeWidth(node.label);
      placed.set(node.id, {
        node,
        row: r,
        x,
        y: MARGIN + r * (NODE_HEIGHT + ROW_GAP),
        width,
        height: NODE_HEIGHT,
      });
      x += width + COLUMN_GAP;
    }
    maxWidth = Math.max(maxWidth, x - COLUMN_GAP + MARGIN);
  }

  const height = MARGIN * 2 + rowNumbers.length * NODE_HEIGHT + (rowNumbers.length - 1) * ROW_GAP;
  return { width: maxWidth, height: Math.max(height, NODE_HEIGHT + 2 * MARGIN), nodes: placed };
}
