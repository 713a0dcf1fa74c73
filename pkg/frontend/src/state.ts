// Selection state and its URL encoding. The whole selection — behavior,
// domain, toggled elements, granularity, and the pinned baseline — lives
// in the query string, so any view is shareable and survives reload.

export interface Selection {
  behavior: string;
  domain: string;
  elements: string[];
  granularity: number;
}

export interface AppState {
  current: Selection;
  baseline: Selection | null;
}

export function normalizeSelection(selection: Selection): Selection {
  return {
    behavior: selection.behavior,
    domain: selection.domain,
    elements: [...new Set(selection.elements)].sort(),
    granularity: Math.max(0, Math.floor(selection.granularity)),
  };
}

export function selectionsEqual(a: Selection, b: Selection): boolean {
  const na = normalizeSelection(a);
  const nb = normalizeSelection(b);
  return (
    na.behavior === nb.behavior &&
    na.domain === nb.domain &&
    na.granularity === nb.granularity &&
    na.elements.join(",") === nb.elements.join(",")
  );
}

function writeSelection(params: URLSearchParams, prefix: string, selection: Selection): void {
  const s = normalizeSelection(selection);
  params.set(prefix + "behavior", s.behavior);
  params.set(prefix + "domain", s.domain);
  if (s.elements.length > 0) {
    params.set(prefix + "elements", s.elements.join(","));
  }
  if (s.granularity > 0) {
    params.set(prefix + "granularity", String(s.granularity));
  }
}

function readSelection(params: URLSearchParams, prefix: string): Selection | null {
  const behavior = params.get(prefix + "behavior");
  const domain = params.get(prefix + "domain");
  if (!behavior || !domain) {
    return null;
  }
  const rawElements = params.get(prefix + "elements") ?? "";
  const granularity = Number.parseInt(params.get(prefix + "granularity") ?? "0", 10);
  return normalizeSelection({
    behavior,
    domain,
    elements: rawElements ? rawElements.split(",") : [],
    granularity: Number.isNaN(granularity) ? 0 : granularity,
  });
}

export function encodeState(state: AppState): string {
  const params = new URLSearchParams();
  writeSelection(params, "", state.current);
  if (state.baseline) {
    writeSelection(params, "b_", state.baseline);
  }
  return params.toString();
}

export function decodeState(queryString: string): AppState | null {
  const params = new URLSearchParams(queryString);
  const current = readSelection(params, "");
  if (!current) {
    return null;
  }
  return { current, baseline: readSelection(params, "b_") };
}

// Discards responses of superseded requests: only the latest sequence
// number issued is considered current.
export class RequestSequencer {
  private counter = 0;

  next(): number {
    this.counter += 1;
    return this.counter;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.counter;
  }
}
