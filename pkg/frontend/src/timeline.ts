// The waveform + region navigator: two stacked tracks (voice above,
// instrument below), region rectangles colored by learning state, a
// moving playhead, drag-to-create, and boundary-drag refinement.

import { fractionToTime, regionRects, timeToFraction, visibleWindow, type ViewState } from "./state.js";
import { renderSparkline } from "./curves.js";
import type { RegionJson, Track } from "./types.js";

export interface TimelineCallbacks {
  onSeek(time: number): void;
  onRegionClick(regionId: string): void;
  onCreateRegion(track: Track, start: number, end: number): void;
  onRefineRegion(regionId: string, bounds: { start?: number; end?: number }): void;
}

const TRACKS: Track[] = ["voice", "instrument"];
const MIN_DRAG_SECONDS = 0.05;

let canvasSupport: boolean | null = null;

function context2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
  if (canvasSupport === false) return null; // headless test environment
  try {
    const context = canvas.getContext("2d");
    canvasSupport = context !== null;
    return context;
  } catch {
    canvasSupport = false;
    return null;
  }
}

interface DragState {
  kind: "create" | "refine-start" | "refine-end";
  track: Track;
  regionId?: string;
  anchorTime: number;
  lastTime: number;
  moved: boolean;
}

export class Timeline {
  private overlays = new Map<Track, HTMLElement>();
  private canvases = new Map<Track, HTMLCanvasElement>();
  private playheadEl: HTMLElement;
  private previewEl: HTMLElement;
  private previewSvg: SVGElement;
  private drag: DragState | null = null;
  private state: ViewState | null = null;

  constructor(
    root: HTMLElement,
    private callbacks: TimelineCallbacks,
    private pixelWidth = 960,
  ) {
    root.classList.add("timeline");
    for (const track of TRACKS) {
      const row = document.createElement("div");
      row.className = `track track-${track}`;
      row.dataset.track = track;
      const canvas = document.createElement("canvas");
      canvas.className = "wave";
      canvas.width = this.pixelWidth;
      canvas.height = 80;
      const overlay = document.createElement("div");
      overlay.className = "overlay";
      row.append(canvas, overlay);
      root.appendChild(row);
      this.canvases.set(track, canvas);
      this.overlays.set(track, overlay);
      overlay.addEventListener("mousedown", (event) => this.beginDrag(event, track));
      overlay.addEventListener("click", (event) => this.clickTrack(event, track));
    }
    this.playheadEl = document.createElement("div");
    this.playheadEl.className = "playhead";
    root.appendChild(this.playheadEl);
    this.previewEl = document.createElement("div");
    this.previewEl.className = "region-preview hidden";
    this.previewSvg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.previewEl.appendChild(this.previewSvg);
    root.appendChild(this.previewEl);
    root.addEventListener("mousemove", (event) => this.moveDrag(event));
    root.addEventListener("mouseup", (event) => this.endDrag(event));
  }

  private widthOf(track: Track): number {
    const overlay = this.overlays.get(track)!;
    return overlay.clientWidth || this.pixelWidth;
  }

  private eventTime(event: MouseEvent, track: Track): number {
    if (!this.state) return 0;
    const overlay = this.overlays.get(track)!;
    const rect = overlay.getBoundingClientRect();
    const fraction = (event.clientX - rect.left) / this.widthOf(track);
    return fractionToTime(this.state, Math.min(Math.max(fraction, 0), 1));
  }

  private clickTrack(event: MouseEvent, track: Track): void {
    if (!this.state) return;
    const target = event.target as HTMLElement;
    if (target.closest(".region")) return; // region clicks are handled per-region
    this.callbacks.onSeek(this.eventTime(event, track));
  }

  private beginDrag(event: MouseEvent, track: Track): void {
    if (!this.state) return;
    const target = event.target as HTMLElement;
    const handle = target.closest(".handle") as HTMLElement | null;
    const regionEl = target.closest(".region") as HTMLElement | null;
    const time = this.eventTime(event, track);
    if (handle && regionEl) {
      this.drag = {
        kind: handle.classList.contains("handle-left") ? "refine-start" : "refine-end",
        track,
        regionId: regionEl.dataset.id,
        anchorTime: time,
        lastTime: time,
        moved: false,
      };
      event.preventDefault();
    } else if (!regionEl) {
      this.drag = { kind: "create", track, anchorTime: time, lastTime: time, moved: false };
    }
  }

  private moveDrag(event: MouseEvent): void {
    if (!this.drag) return;
    this.drag.lastTime = this.eventTime(event, this.drag.track);
    this.drag.moved = true;
  }

  private endDrag(event: MouseEvent): void {
    if (!this.drag) return;
    const drag = this.drag;
    this.drag = null;
    drag.lastTime = this.eventTime(event, drag.track);
    if (!drag.moved || Math.abs(drag.lastTime - drag.anchorTime) < MIN_DRAG_SECONDS) return;
    if (drag.kind === "create") {
      const start = Math.min(drag.anchorTime, drag.lastTime);
      const end = Math.max(drag.anchorTime, drag.lastTime);
      this.callbacks.onCreateRegion(drag.track, start, end);
    } else if (drag.regionId) {
      const bounds = drag.kind === "refine-start" ? { start: drag.lastTime } : { end: drag.lastTime };
      this.callbacks.onRefineRegion(drag.regionId, bounds);
    }
  }

  private showPreview(region: RegionJson, element: HTMLElement): void {
    if (!this.state?.previewEnabled || !region.curve) return;
    renderSparkline(this.previewSvg, region.curve);
    this.previewEl.classList.remove("hidden");
    this.previewEl.style.left = element.style.left;
  }

  render(state: ViewState): void {
    this.state = state;
    this.drawWaves(state);
    const rects = regionRects(state);
    for (const track of TRACKS) {
      const overlay = this.overlays.get(track)!;
      overlay.textContent = "";
      for (const rect of rects.filter((r) => r.track === track)) {
        const region = state.displayedRegions.find((r) => r.id === rect.id)!;
        const el = document.createElement("div");
        el.className = `region state-${rect.state}`;
        if (rect.queryMatch) el.classList.add("query-match");
        if (state.selectedRegionId === rect.id) el.classList.add("selected");
        el.dataset.id = rect.id;
        el.style.left = `${(rect.leftFraction * 100).toFixed(3)}%`;
        el.style.width = `${(rect.widthFraction * 100).toFixed(3)}%`;
        const left = document.createElement("div");
        left.className = "handle handle-left";
        const right = document.createElement("div");
        right.className = "handle handle-right";
        el.append(left, right);
        el.addEventListener("click", (event) => {
          event.stopPropagation();
          this.callbacks.onRegionClick(rect.id);
        });
        el.addEventListener("mouseenter", () => {
          el.classList.add("hover");
          this.showPreview(region, el);
        });
        el.addEventListener("mouseleave", () => {
          el.classList.remove("hover");
          this.previewEl.classList.add("hidden");
        });
        overlay.appendChild(el);
      }
    }
    const fraction = timeToFraction(state, state.playhead);
    this.playheadEl.style.left = `${(Math.min(Math.max(fraction, 0), 1) * 100).toFixed(3)}%`;
  }

  private drawWaves(state: ViewState): void {
    if (!state.manifest) return;
    const { start, end } = visibleWindow(state);
    const windowSeconds = 0.02;
    for (const track of TRACKS) {
      const canvas = this.canvases.get(track)!;
      const context = context2d(canvas);
      if (!context) continue;
      const peaks = state.manifest.waveform_peaks[track] ?? [];
      context.clearRect(0, 0, canvas.width, canvas.height);
      context.fillStyle = track === "voice" ? "#7a9cc6" : "#6cae8e";
      const mid = canvas.height / 2;
      for (let x = 0; x < canvas.width; x++) {
        const time = start + ((end - start) * x) / canvas.width;
        const index = Math.floor(time / windowSeconds);
        if (index < 0 || index >= peaks.length) continue;
        const [low, high] = peaks[index];
        const top = mid - high * mid;
        const bottom = mid - low * mid;
        context.fillRect(x, top, 1, Math.max(bottom - top, 1));
      }
    }
  }
}
