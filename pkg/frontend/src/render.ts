// SVG DOM rendering of a scene, with hit-testing through data attributes.
// Colors mirror the service's static renderer theme defaults.

import type { Scene, SceneNode, ArcSpec } from "./scene.js";
import type { PlaybackStep } from "./playback.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const COLORS = {
  incoming: "#7d5ba6",
  outgoing: "#1f9e92",
  victim: "#e8b931",
  mule: "#d23f44",
  fraud: "#b0161b",
  neutral: "#c9ced8",
  ringBase: "#e8eaf0",
  text: "#2e3440",
  highlight: "#ff8c00",
};

export interface RenderHandlers {
  onMetaClick?: (metaId: string) => void;
  onNodeClick?: (accountId: string) => void;
  onHover?: (nodeKey: string | null, x: number, y: number, tooltip: string) => void;
}

function el(name: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function polar(cx: number, cy: number, r: number, degFromTop: number): [number, number] {
  const rad = ((degFromTop - 90) * Math.PI) / 180;
  return [cx + r * Math.cos(rad), cy + r * Math.sin(rad)];
}

function arcPath(cx: number, cy: number, r: number, arc: ArcSpec): string {
  const endDeg = arc.clockwise ? arc.startDeg + arc.deltaDeg : arc.startDeg - arc.deltaDeg;
  const [x0, y0] = polar(cx, cy, r, arc.startDeg);
  const [x1, y1] = polar(cx, cy, r, endDeg);
  const sweep = arc.clockwise ? 1 : 0;
  return `M ${x0.toFixed(2)} ${y0.toFixed(2)} A ${r} ${r} 0 0 ${sweep} ${x1.toFixed(2)} ${y1.toFixed(2)}`;
}

function renderNode(node: SceneNode, handlers: RenderHandlers): SVGElement {
  const group = el("g", { class: `node node-${node.kind}`, "data-node": node.key });
  group.setAttribute("style", `opacity: ${node.dimmed ? 0.25 : 1}; transition: opacity 280ms;`);
  group.appendChild(
    el("circle", {
      cx: node.x, cy: node.y, r: node.radius,
      fill: "none", stroke: COLORS.ringBase, "stroke-width": 5,
    }),
  );
  if (node.kind === "victim" || node.kind === "mule") {
    group.appendChild(
      el("circle", {
        cx: node.x, cy: node.y, r: node.radius + 5,
        fill: "none", stroke: node.kind === "victim" ? COLORS.victim : COLORS.mule,
        "stroke-width": 2,
      }),
    );
  }
  for (const arc of node.arcs) {
    group.appendChild(
      el("path", {
        d: arcPath(node.x, node.y, node.radius, arc),
        fill: "none",
        stroke: arc.direction === "incoming" ? COLORS.incoming : COLORS.outgoing,
        "stroke-width": 5,
      }),
    );
  }
  if (node.kind === "meta" && node.count !== undefined) {
    const label = el("text", {
      x: node.x, y: node.y + 3.5, "font-size": 11,
      "text-anchor": "middle", fill: COLORS.text, "font-weight": "bold",
    });
    label.textContent = String(node.count);
    group.appendChild(label);
  }
  group.addEventListener("click", () => {
    if (node.kind === "meta") handlers.onMetaClick?.(node.key);
    else handlers.onNodeClick?.(node.key);
  });
  group.addEventListener("mouseenter", () =>
    handlers.onHover?.(node.key, node.x, node.y, node.tooltip),
  );
  group.addEventListener("mouseleave", () => handlers.onHover?.(null, 0, 0, ""));
  return group;
}

/** Render the scene into (and replace the contents of) an SVG element. */
export function renderScene(svg: SVGSVGElement, scene: Scene, handlers: RenderHandlers = {}): void {
  svg.setAttribute("viewBox", `0 0 ${scene.width} ${scene.height}`);
  svg.setAttribute("width", String(scene.width));
  svg.setAttribute("height", String(scene.height));
  svg.replaceChildren();

  const rowsGroup = el("g", { class: "rows" });
  for (const row of scene.rows) {
    const label = el("text", { x: 14, y: row.y - 18, "font-size": 11, fill: COLORS.text, "font-weight": "bold" });
    label.textContent = row.displayName;
    rowsGroup.appendChild(label);
    const inText = el("text", { x: 14, y: row.y - 4, "font-size": 9, fill: COLORS.text });
    inText.textContent = row.incomingLabel;
    rowsGroup.appendChild(inText);
    rowsGroup.appendChild(
      el("rect", { x: 14, y: row.y + 2, width: 74 * row.incomingFraction, height: 5, fill: COLORS.incoming }),
    );
    const outText = el("text", { x: 14, y: row.y + 18, "font-size": 9, fill: COLORS.text });
    outText.textContent = row.outgoingLabel;
    rowsGroup.appendChild(outText);
    rowsGroup.appendChild(
      el("rect", { x: 14, y: row.y + 22, width: 74 * row.outgoingFraction, height: 5, fill: COLORS.outgoing }),
    );
    rowsGroup.appendChild(
      el("line", {
        x1: 8, y1: row.baselineY, x2: scene.width - 8, y2: row.baselineY,
        stroke: COLORS.ringBase, "stroke-width": 0.5, "stroke-dasharray": "2 3",
      }),
    );
  }
  svg.appendChild(rowsGroup);

  const edgesGroup = el("g", { class: "edges" });
  for (const edge of scene.edges) {
    const path = el("path", {
      d: edge.path,
      fill: "none",
      stroke: edge.fraud ? COLORS.fraud : COLORS.neutral,
      "stroke-width": edge.thickness,
      "data-edge": edge.key,
    });
    path.setAttribute("style", `opacity: ${edge.dimmed ? 0.12 : 1}; transition: opacity 280ms;`);
    edgesGroup.appendChild(path);
  }
  svg.appendChild(edgesGroup);

  const nodesGroup = el("g", { class: "nodes" });
  for (const node of scene.nodes) nodesGroup.appendChild(renderNode(node, handlers));
  svg.appendChild(nodesGroup);

  const timelineGroup = el("g", { class: "timeline" });
  const base = scene.timelineBaseY + 38;
  timelineGroup.appendChild(
    el("line", { x1: 0, y1: base, x2: scene.width, y2: base, stroke: COLORS.neutral, "stroke-width": 1 }),
  );
  for (const bar of scene.timeline) {
    if (bar.height <= 0) continue;
    timelineGroup.appendChild(
      el("rect", { x: bar.x, y: base - bar.height, width: bar.width, height: bar.height, fill: COLORS.neutral }),
    );
    if (bar.fraudHeight > 0) {
      timelineGroup.appendChild(
        el("rect", { x: bar.x, y: base - bar.fraudHeight, width: bar.width, height: bar.fraudHeight, fill: COLORS.fraud }),
      );
    }
  }
  const reduction = el("text", { x: scene.width - 8, y: base + 16, "font-size": 10, "text-anchor": "end", fill: COLORS.text });
  reduction.textContent = scene.reductionLabel;
  timelineGroup.appendChild(reduction);
  svg.appendChild(timelineGroup);
}

/** Highlight one playback step (or clear all highlights with null). */
export function applyHighlight(svg: SVGSVGElement, step: PlaybackStep | null): void {
  for (const path of svg.querySelectorAll<SVGPathElement>("[data-edge]")) {
    const active = step !== null && path.getAttribute("data-edge") === step.edgeKey;
    path.style.stroke = active ? COLORS.highlight : "";
    path.style.filter = active ? "drop-shadow(0 0 3px rgba(255,140,0,0.9))" : "";
  }
}
