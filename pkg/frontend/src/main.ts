// Application wiring: selection controls on the left, the rendered
// graph in the middle, trace/diff panels on the right. Every state
// change regenerates through the API (the UI does no inference) and is
// mirrored into the URL.

import { ApiClient, ApiError } from "./api.js";
import { renderScene } from "./dom.js";
import { buildScene } from "./scene.js";
import {
  AppState,
  RequestSequencer,
  Selection,
  decodeState,
  encodeState,
  normalizeSelection,
  selectionsEqual,
} from "./state.js";
import { describeStep, stepsForSkill } from "./trace.js";
import type { CatalogPayload, GenerateResponse, MetaPayload } from "./types.js";

const api = new ApiClient();
const sequencer = new RequestSequencer();

interface View {
  behaviorSelect: HTMLSelectElement;
  domainSelect: HTMLSelectElement;
  granularityInput: HTMLInputElement;
  layersContainer: HTMLElement;
  svg: SVGSVGElement;
  statusLine: HTMLElement;
  tracePanel: HTMLElement;
  diffPanel: HTMLElement;
  warningsPanel: HTMLElement;
  pinButton: HTMLButtonElement;
  clearPinButton: HTMLButtonElement;
}

interface Session {
  state: AppState;
  catalog: CatalogPayload | null;
  current: GenerateResponse | null;
  baseline: GenerateResponse | null;
}

function query<T extends Element>(selector: string): T {
  const element = document.querySelector<T>(selector);
  if (!element) {
    throw new Error(`missing element ${selector}`);
  }
  return element;
}

function defaultSelection(meta: MetaPayload): Selection {
  return {
    behavior: meta.behaviors[0]?.id ?? "",
    domain: meta.domains[0]?.id ?? "",
    elements: [],
    granularity: 0,
  };
}

function setStatus(view: View, text: string, isError = false): void {
  view.statusLine.textContent = text;
  view.statusLine.classList.toggle("error", isError);
}

function syncUrl(state: AppState): void {
  const encoded = encodeState(state);
  history.replaceState(null, "", `${location.pathname}?${encoded}`);
}

function renderLayerToggles(view: View, session: Session, onToggle: () => void): void {
  const catalog = session.catalog;
  view.layersContainer.innerHTML = "";
  if (!catalog) {
    return;
  }
  const selected = new Set(session.state.current.elements);
  for (const [layer, elements] of Object.entries(catalog.layers)) {
    const section = document.createElement("section");
    const heading = document.createElement("h3");
    heading.textContent = layer;
    section.appendChild(heading);
    for (const element of elements) {
      if (element.is_behavior) {
        continue; // behaviors are chosen in the behavior selector
      }
      const row = document.createElement("label");
      row.className = "toggle";
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = element.id;
      box.checked = selected.has(element.id);
      box.addEventListener("change", () => {
        const elements = new Set(session.state.current.elements);
        if (box.checked) {
          elements.add(element.id);
        } else {
          elements.delete(element.id);
        }
        session.state.current = normalizeSelection({
          ...session.state.current,
          elements: [...elements],
        });
        onToggle();
      });
      row.appendChild(box);
      const text = document.createElement("span");
      text.textContent = element.label;
      text.title = element.determines.length
        ? `determines: ${element.determines.join(", ")}`
        : "determines no skills";
      row.appendChild(text);
      section.appendChild(row);
    }
    view.layersContainer.appendChild(section);
  }
}

function renderDiffPanel(view: View, session: Session, diff: import("./types.js").DiffPayload | null): void {
  view.diffPanel.innerHTML = "";
  if (!session.state.baseline) {
    view.diffPanel.textContent = "No baseline pinned.";
    return;
  }
  if (!diff) {
    return;
  }
  const block = (title: string, entries: string[], cls: string): void => {
    const heading = document.createElement("h3");
    heading.textContent = `${title} (${entries.length})`;
    view.diffPanel.appendChild(heading);
    const list = document.createElement("ul");
    list.className = cls;
    for (const entry of entries) {
      const item = document.createElement("li");
      item.textContent = entry;
      list.appendChild(item);
    }
    view.diffPanel.appendChild(list);
  };
  block("added nodes", diff.added_nodes, "added");
  block("removed nodes", diff.removed_nodes, "removed");
  block(
    "added edges",
    diff.added_edges.map((e) => `${e.parent} -> ${e.child} (${e.flavor})`),
    "added",
  );
  block(
    "removed edges",
    diff.removed_edges.map((e) => `${e.parent} -> ${e.child} (${e.flavor})`),
    "removed",
  );
}

function renderWarnings(view: View, warnings: string[]): void {
  view.warningsPanel.innerHTML = "";
  if (warnings.length === 0) {
    return;
  }
  const heading = document.createElement("h3");
  heading.textContent = "warnings";
  view.warningsPanel.appendChild(heading);
  for (const warning of warnings) {
    const line = document.createElement("div");
    line.textContent = warning;
    view.warningsPanel.appendChild(line);
  }
}

function showTrace(view: View, session: Session, skillId: string): void {
  view.tracePanel.innerHTML = "";
  const heading = document.createElement("h3");
  heading.textContent = `trace: ${skillId}`;
  view.tracePanel.appendChild(heading);
  if (!session.current) {
    return;
  }
  for (const step of stepsForSkill(session.current.trace, skillId)) {
    const line = document.createElement("div");
    line.textContent = describeStep(step);
    view.tracePanel.appendChild(line);
  }
}

async function regenerate(view: View, session: Session): Promise<void> {
  const ticket = sequencer.next();
  setStatus(view, "generating…");
  syncUrl(session.state);
  try {
    const current = await api.generate(session.state.current);
    let baseline: GenerateResponse | null = null;
    let diff = null;
    if (session.state.baseline) {
      baseline = await api.generate(session.state.baseline);
      diff = await api.diff(session.state.baseline, session.state.current);
    }
    if (!sequencer.isCurrent(ticket)) {
      return; // a newer selection superseded this response
    }
    session.current = current;
    session.baseline = baseline;
    const scene =
      baseline && diff
        ? buildScene(current.graph, { diff, baseline: baseline.graph })
        : buildScene(current.graph);
    renderScene(view.svg, scene, (id) => showTrace(view, session, id));
    renderDiffPanel(view, session, diff);
    renderWarnings(view, current.warnings);
    setStatus(
      view,
      `${current.graph.nodes.length} skills, ${current.graph.edges.length} dependencies`
    );
  } catch (error) {
    if (!sequencer.isCurrent(ticket)) {
      return;
    }
    if (error instanceof ApiError) {
      setStatus(view, `${error.body.code}: ${error.body.message}`, true);
    } else {
      setStatus(view, String(error), true);
    }
  }
}

async function switchDomain(view: View, session: Session): Promise<void> {
  session.catalog = await api.sceneElements(session.state.current.domain);
  const valid = new Set(
    Object.values(session.catalog.layers).flatMap((layer) => layer.map((e) => e.id)),
  );
  session.state.current = normalizeSelection({
    ...session.state.current,
    elements: session.state.current.elements.filter((id) => valid.has(id)),
  });
  renderLayerToggles(view, session, () => void regenerate(view, session));
}

export async function start(): Promise<void> {
  const view: View = {
    behaviorSelect: query("#behavior"),
    domainSelect: query("#domain"),
    granularityInput: query("#granularity"),
    layersContainer: query("#layers"),
    svg: query("#graph"),
    statusLine: query("#status"),
    tracePanel: query("#trace"),
    diffPanel: query("#diff"),
    warningsPanel: query("#warnings"),
    pinButton: query("#pin"),
    clearPinButton: query("#clear-pin"),
  };

  const meta = await api.meta();
  const restored = decodeState(location.search);
  const session: Session = {
    state: restored ?? { current: defaultSelection(meta), baseline: null },
    catalog: null,
    current: null,
    baseline: null,
  };

  for (const behavior of meta.behaviors) {
    view.behaviorSelect.add(new Option(behavior.label, behavior.id));
  }
  for (const domain of meta.domains) {
    view.domainSelect.add(new Option(domain.label, domain.id));
  }
  view.behaviorSelect.value = session.state.current.behavior;
  view.domainSelect.value = session.state.current.domain;
  view.granularityInput.value = String(session.state.current.granularity);

  view.behaviorSelect.addEventListener("change", () => {
    session.state.current = { ...session.state.current, behavior: view.behaviorSelect.value };
    void regenerate(view, session);
  });
  view.domainSelect.addEventListener("change", async () => {
    session.state.current = { ...session.state.current, domain: view.domainSelect.value };
    await switchDomain(view, session);
    void regenerate(view, session);
  });
  view.granularityInput.addEventListener("change", () => {
    session.state.current = normalizeSelection({
      ...session.state.current,
      granularity: Number.parseInt(view.granularityInput.value || "0", 10),
    });
    void regenerate(view, session);
  });
  view.pinButton.addEventListener("click", () => {
    session.state.baseline = { ...session.state.current };
    void regenerate(view, session);
  });
  view.clearPinButton.addEventListener("click", () => {
    session.state.baseline = null;
    void regenerate(view, session);
  });

  await switchDomain(view, session);
  if (
    session.state.baseline &&
    selectionsEqual(session.state.baseline, session.state.current)
  ) {
    // pinning the identical selection renders no annotations; keep it,
    // the diff panel simply shows empty sets
  }
  await regenerate(view, session);
}

start().catch((error) => {
  const status = document.querySelector("#status");
  if (status) {
    status.textContent = String(error);
    status.classList.add("error");
  }
});
