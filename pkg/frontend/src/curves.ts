// Melody visualization: reference and user pitch curves on one SVG,
// plotted in unrounded MIDI so bends and vibrato stay visible, with
// highlight rectangles over spans the server flagged as mismatches.

import type { CurveJson } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 1000;
const HEIGHT = 240;

function clear(node: SVGElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

function midiRange(curves: (CurveJson | null | undefined)[]): [number, number] {
  let low = Infinity;
  let high = -Infinity;
  for (const curve of curves) {
    for (const value of curve?.midi ?? []) {
      if (value === null) continue;
      low = Math.min(low, value);
      high = Math.max(high, value);
    }
  }
  if (!Number.isFinite(low)) return [50, 80];
  return [low - 2, high + 2];
}

function voicedRuns(curve: CurveJson): { times: number[]; midi: number[] }[] {
  const runs: { times: number[]; midi: number[] }[] = [];
  let current: { times: number[]; midi: number[] } | null = null;
  curve.times.forEach((time, index) => {
    const value = curve.midi[index];
    if (value === null) {
      current = null;
      return;
    }
    if (!current) {
      current = { times: [], midi: [] };
      runs.push(current);
    }
    current.times.push(time);
    current.midi.push(value);
  });
  return runs;
}

export interface CurveRenderOptions {
  reference?: CurveJson | null;
  user?: CurveJson | null;
  duration: number;
  mistakeSpans?: [number, number][];
  referenceOpacity?: number;
  userOpacity?: number;
}

export function renderCurves(svg: SVGElement, options: CurveRenderOptions): void {
  clear(svg);
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("preserveAspectRatio", "none");
  const total = Math.max(options.duration, 1e-6);
  const [low, high] = midiRange([options.reference, options.user]);
  const x = (t: number) => (t / total) * WIDTH;
  const y = (m: number) => HEIGHT - ((m - low) / (high - low)) * HEIGHT;

  for (const [start, end] of options.mistakeSpans ?? []) {
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", x(start).toFixed(2));
    rect.setAttribute("y", "0");
    rect.setAttribute("width", Math.max(x(end) - x(start), 2).toFixed(2));
    rect.setAttribute("height", String(HEIGHT));
    rect.setAttribute("class", "mistake-span");
    svg.appendChild(rect);
  }

  const lanes: [CurveJson | null | undefined, string, number][] = [
    [options.reference, "curve-reference", options.referenceOpacity ?? 1],
    [options.user, "curve-user", options.userOpacity ?? 1],
  ];
  for (const [curve, klass, opacity] of lanes) {
    if (!curve) continue;
    for (const run of voicedRuns(curve)) {
      const line = document.createElementNS(SVG_NS, "polyline");
      line.setAttribute(
        "points",
        run.times.map((t, i) => `${x(t).toFixed(2)},${y(run.midi[i]).toFixed(2)}`).join(" "),
      );
      line.setAttribute("class", klass);
      line.setAttribute("fill", "none");
      line.setAttribute("stroke-opacity", opacity.toFixed(3));
      svg.appendChild(line);
    }
  }
}

/** Tiny hover sparkline for region preview. */
export function renderSparkline(svg: SVGElement, curve: CurveJson | undefined): void {
  clear(svg);
  svg.setAttribute("viewBox", "0 0 120 40");
  if (!curve || curve.times.length === 0) return;
  const total = curve.times[curve.times.length - 1] || 1e-6;
  const [low, high] = midiRange([curve]);
  for (const run of voicedRuns(curve)) {
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute(
      "points",
      run.times
        .map((t, i) => `${((t / total) * 120).toFixed(1)},${(40 - ((run.midi[i] - low) / (high - low)) * 40).toFixed(1)}`)
        .join(" "),
    );
    line.setAttribute("class", "sparkline");
    line.setAttribute("fill", "none");
    svg.appendChild(line);
  }
}
