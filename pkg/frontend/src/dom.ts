// Thin DOM writer: turns a Scene into SVG elements. All layout and
// styling decisions were made in scene.ts; this file only materializes
// them.

import type { Scene } from "./scene.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderScene(
  svg: SVGSVGElement,
  scene: Scene,
  onNodeClick?: (id: string) => void,
): void {
  svg.innerHTML = "";
  svg.setAttribute("viewBox", `0 0 ${scene.width} ${scene.height}`);
  svg.setAttribute("width", String(scene.width));
  svg.setAttribute("height", String(scene.height));

  const defs = document.createElementNS(SVG_NS, "defs");
  defs.innerHTML =
    '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" ' +
    'markerHeight="7" orient="auto-start-reverse">' +
    '<path d="M 0 0 L 10 5 L 0 10 z" fill="#5f6368"/></marker>';
  svg.appendChild(defs);

  for (const edge of scene.edges) {
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(edge.x1));
    line.setAttribute("y1", String(edge.y1));
    line.setAttribute("x2", String(edge.x2));
    line.setAttribute("y2", String(edge.y2));
    line.setAttribute("marker-end", "url(#arrow)");
    line.classList.add("edge", ...edge.classes);
    if (edge.dashed) {
      line.classList.add("dashed");
    }
    svg.appendChild(line);
  }

  for (const node of scene.nodes) {
    const group = document.createElementNS(SVG_NS, "g");
    group.classList.add("node", ...node.classes);
    group.addEventListener("click", () => onNodeClick?.(node.id));

    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(node.x));
    rect.setAttribute("y", String(node.y));
    rect.setAttribute("width", String(node.width));
    rect.setAttribute("height", String(node.height));
    rect.setAttribute("rx", "6");
    rect.setAttribute("fill", node.fill);
    group.appendChild(rect);

    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(node.x + node.width / 2));
    text.setAttribute("y", String(node.y + node.height / 2 + 4));
    text.setAttribute("text-anchor", "middle");
    text.setAttribute("fill", node.textColor);
    text.textContent = node.label;
    group.appendChild(text);

    svg.appendChild(group);
  }
}
