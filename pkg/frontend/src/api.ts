import type {
  ApiErrorBody,
  CatalogPayload,
  DiffPayload,
  GenerateResponse,
  MetaPayload,
} from "./types.js";
import type { Selection } from "./state.js";

export class ApiError extends Error {
  constructor(readonly body: ApiErrorBody) {
    super(`${body.code}: ${body.message}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(body as ApiErrorBody);
  }
  return body as T;
}

function selectionBody(selection: Selection): Record<string, unknown> {
  return {
    behavior: selection.behavior,
    domain: selection.domain,
    elements: selection.elements,
    granularity: selection.granularity,
  };
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  meta(): Promise<MetaPayload> {
    return request(`${this.base}/api/v1/meta`);
  }

  sceneElements(domain: string): Promise<CatalogPayload> {
    return request(`${this.base}/api/v1/scene-elements?domain=${encodeURIComponent(domain)}`);
  }

  generate(selection: Selection): Promise<GenerateResponse> {
    return request(`${this.base}/api/v1/graphs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(selectionBody(selection)),
    });
  }

  diff(baseline: Selection, current: Selection): Promise<DiffPayload> {
    return request(`${this.base}/api/v1/graphs/diff`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        query_a: selectionBody(baseline),
        query_b: selectionBody(current),
      }),
    });
  }
}
