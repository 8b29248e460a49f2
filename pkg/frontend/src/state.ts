// View state and the pure geometry/selection logic behind the UI.
// Kept free of DOM access so it can be unit-tested directly.

import type { Manifest, Progression, RegionJson, RegionState, ScoreResponse, SessionJson } from "./types.js";

export const SPEED_OPTIONS = [0.5, 0.75, 1.0] as const;
export type Speed = (typeof SPEED_OPTIONS)[number];

export interface ReplayState {
  response: ScoreResponse;
  mix: number; // 0 = reference only, 1 = user only
  take?: { samples: Float32Array; sampleRate: number };
}

export interface ViewState {
  manifest: Manifest | null;
  regionStates: Record<string, RegionState>;
  displayedRegions: RegionJson[];
  queryMatches: string[];
  zoom: number; // 1 = whole lesson visible
  viewStart: number; // left edge of the visible window, seconds
  playhead: number;
  selectedRegionId: string | null;
  loop: boolean;
  speed: Speed;
  recordArmed: boolean;
  previewEnabled: boolean;
  replay: ReplayState | null;
  summary: Progression;
  history: SessionJson["history"];
  revision: number;
}

export function initialState(): ViewState {
  return {
    manifest: null,
    regionStates: {},
    displayedRegions: [],
    queryMatches: [],
    zoom: 1,
    viewStart: 0,
    playhead: 0,
    selectedRegionId: null,
    loop: false,
    speed: 1.0,
    recordArmed: false,
    previewEnabled: false,
    replay: null,
    summary: { to_learn: 0, started: 0, aced: 0 },
    history: {},
    revision: 0,
  };
}

export function duration(state: ViewState): number {
  return state.manifest?.duration ?? 0;
}

export function visibleWindow(state: ViewState): { start: number; end: number } {
  const total = duration(state);
  const span = total / state.zoom;
  const start = Math.min(Math.max(state.viewStart, 0), Math.max(total - span, 0));
  return { start, end: start + span };
}

export function setZoom(state: ViewState, zoom: number): void {
  state.zoom = Math.min(Math.max(zoom, 1), 50);
  // keep the playhead in view
  const { start, end } = visibleWindow(state);
  if (state.playhead < start || state.playhead > end) {
    state.viewStart = Math.max(state.playhead - (end - start) / 2, 0);
  }
}

export function resetZoom(state: ViewState): void {
  state.zoom = 1;
  state.viewStart = 0;
}

export function seek(state: ViewState, time: number): void {
  state.playhead = Math.min(Math.max(time, 0), duration(state));
}

export function setSpeed(state: ViewState, value: number): void {
  const match = SPEED_OPTIONS.find((s) => s === value);
  state.speed = match ?? 1.0;
}

export function selectRegion(state: ViewState, regionId: string | null): void {
  state.selectedRegionId = regionId;
  if (regionId === null) state.loop = false; // loop requires a selection
}

export function toggleLoop(state: ViewState): boolean {
  if (state.selectedRegionId === null) {
    state.loop = false;
    return false;
  }
  state.loop = !state.loop;
  return state.loop;
}

export function regionById(state: ViewState, regionId: string): RegionJson | undefined {
  return state.displayedRegions.find((r) => r.id === regionId);
}

export function loadAutoRegions(state: ViewState): void {
  if (!state.manifest) return;
  const present = new Set(state.displayedRegions.map((r) => r.id));
  for (const region of [...state.manifest.voice_regions, ...state.manifest.instrument_regions]) {
    if (!present.has(region.id)) state.displayedRegions.push(region);
  }
  state.displayedRegions.sort((a, b) => a.start - b.start);
}

export function clearRegions(state: ViewState): void {
  state.displayedRegions = [];
  state.queryMatches = [];
  selectRegion(state, null);
}

export function applySession(state: ViewState, session: SessionJson): void {
  state.regionStates = session.region_states;
  state.summary = session.summary;
  state.history = session.history;
  state.revision = session.revision;
  const deleted = new Set(session.deleted_ids);
  state.displayedRegions = state.displayedRegions.filter((r) => !deleted.has(r.id));
  for (const region of session.user_regions) {
    const index = state.displayedRegions.findIndex((r) => r.id === region.id);
    if (index >= 0) state.displayedRegions[index] = region;
    else state.displayedRegions.push(region);
  }
  state.displayedRegions.sort((a, b) => a.start - b.start);
}

export function stateOf(state: ViewState, regionId: string): RegionState {
  return state.regionStates[regionId] ?? "to_learn";
}

// -- geometry ---------------------------------------------------------------

export interface RegionRect {
  id: string;
  track: RegionJson["track"];
  leftFraction: number;
  widthFraction: number;
  state: RegionState;
  queryMatch: boolean;
}

export function timeToFraction(state: ViewState, time: number): number {
  const { start, end } = visibleWindow(state);
  return end > start ? (time - start) / (end - start) : 0;
}

export function fractionToTime(state: ViewState, fraction: number): number {
  const { start, end } = visibleWindow(state);
  return start + fraction * (end - start);
}

export function regionRects(state: ViewState): RegionRect[] {
  const rects: RegionRect[] = [];
  for (const region of state.displayedRegions) {
    const left = timeToFraction(state, region.start);
    const right = timeToFraction(state, region.end);
    if (right < 0 || left > 1) continue;
    rects.push({
      id: region.id,
      track: region.track,
      leftFraction: Math.max(left, 0),
      widthFraction: Math.min(right, 1) - Math.max(left, 0),
      state: stateOf(state, region.id),
      queryMatch: state.queryMatches.includes(region.id),
    });
  }
  return rects;
}

export function connectOrder(state: ViewState): RegionJson[] {
  return [...state.displayedRegions].sort((a, b) => a.start - b.start);
}
