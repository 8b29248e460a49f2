// Learning-progression charts, rendered as plain SVG so state is
// inspectable as DOM.

import type { HistoryCounters, Progression } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const STATE_ORDER = ["to_learn", "started", "aced"] as const;
const COUNTER_ORDER = ["played", "looped", "recorded", "aced"] as const;

function clear(node: SVGElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

function polar(cx: number, cy: number, radius: number, angle: number): [number, number] {
  return [cx + radius * Math.cos(angle), cy + radius * Math.sin(angle)];
}

/** Doughnut with one segment per learning stage, sized by proportion. */
export function renderDoughnut(svg: SVGElement, summary: Progression): void {
  clear(svg);
  svg.setAttribute("viewBox", "0 0 100 100");
  const total = summary.to_learn + summary.started + summary.aced;
  const cx = 50;
  const cy = 50;
  const radius = 38;
  let angle = -Math.PI / 2;
  for (const stage of STATE_ORDER) {
    const count = summary[stage];
    if (count === 0 || total === 0) continue;
    const sweep = (count / total) * 2 * Math.PI;
    const element = document.createElementNS(SVG_NS, count === total ? "circle" : "path");
    if (count === total) {
      element.setAttribute("cx", String(cx));
      element.setAttribute("cy", String(cy));
      element.setAttribute("r", String(radius));
      element.setAttribute("fill", "none");
    } else {
      const [x0, y0] = polar(cx, cy, radius, angle);
      const [x1, y1] = polar(cx, cy, radius, angle + sweep);
      const large = sweep > Math.PI ? 1 : 0;
      element.setAttribute("d", `M ${x0.toFixed(2)} ${y0.toFixed(2)} A ${radius} ${radius} 0 ${large} 1 ${x1.toFixed(2)} ${y1.toFixed(2)}`);
      element.setAttribute("fill", "none");
    }
    element.setAttribute("class", `doughnut-${stage}`);
    element.setAttribute("data-state", stage);
    element.setAttribute("data-count", String(count));
    element.setAttribute("stroke-width", "16");
    svg.appendChild(element);
    angle += sweep;
  }
  const label = document.createElementNS(SVG_NS, "text");
  label.setAttribute("x", "50");
  label.setAttribute("y", "54");
  label.setAttribute("text-anchor", "middle");
  label.setAttribute("class", "doughnut-label");
  label.textContent = total ? `${summary.aced}/${total}` : "";
  svg.appendChild(label);
}

/** Per-region practice history as grouped bars (played/looped/recorded/aced). */
export function renderHistory(svg: SVGElement, history: Record<string, HistoryCounters>, regionOrder: string[]): void {
  clear(svg);
  const regions = regionOrder.filter((id) => history[id]);
  const width = Math.max(regions.length * 60, 60);
  svg.setAttribute("viewBox", `0 0 ${width} 120`);
  const peak = Math.max(1, ...regions.flatMap((id) => COUNTER_ORDER.map((kind) => history[id][kind])));
  regions.forEach((id, index) => {
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("data-region", id);
    COUNTER_ORDER.forEach((kind, k) => {
      const count = history[id][kind];
      const height = (count / peak) * 90;
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(index * 60 + k * 12 + 6));
      rect.setAttribute("y", String(100 - height));
      rect.setAttribute("width", "10");
      rect.setAttribute("height", height.toFixed(2));
      rect.setAttribute("class", `bar-${kind}`);
      rect.setAttribute("data-kind", kind);
      rect.setAttribute("data-count", String(count));
      group.appendChild(rect);
    });
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(index * 60 + 30));
    label.setAttribute("y", "114");
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "history-label");
    label.textContent = id.replace(/^(instrument|voice)-/, "$1 ");
    group.appendChild(label);
    svg.appendChild(group);
  });
}
