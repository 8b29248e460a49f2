// Application shell: wires the toolbar, timeline, feedback pane, and
// progression charts to the API client and audio engine. All musical
// analysis (notes, scores, state transitions) happens server-side; this
// layer renders server responses and emits practice events.

import { ApiClient } from "./api.js";
import type { AudioEngine, RecordedTake } from "./audio.js";
import { renderDoughnut, renderHistory } from "./charts.js";
import { renderCurves } from "./curves.js";
import {
  applySession,
  clearRegions,
  connectOrder,
  duration,
  initialState,
  loadAutoRegions,
  regionById,
  resetZoom,
  seek,
  selectRegion,
  setSpeed,
  setZoom,
  toggleLoop,
  type ViewState,
} from "./state.js";
import { Timeline } from "./timeline.js";
import type { RegionJson, ScoreResponse, Track } from "./types.js";
import { encodeWavPcm16 } from "./wav.js";

export class App {
  readonly state: ViewState = initialState();
  lessonId = "";
  private timeline: Timeline;
  private pending: Promise<unknown> = Promise.resolve();
  private sections: Record<string, HTMLElement> = {};

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private engine: AudioEngine,
  ) {
    this.root.innerHTML = "";
    this.buildLayout();
    this.timeline = new Timeline(this.sections.timeline, {
      onSeek: (time) => {
        seek(this.state, time);
        this.engine.seek(time);
        this.enqueue(() => this.handlePlayheadEntered(time));
        this.renderTimeline();
      },
      onRegionClick: (regionId) => this.enqueue(() => this.playRegion(regionId)),
      onCreateRegion: (track, start, end) => this.enqueue(() => this.createRegion(track, start, end)),
      onRefineRegion: (regionId, bounds) => this.enqueue(() => this.refineRegion(regionId, bounds)),
    });
  }

  /** Await all in-flight handler work (tests use this to settle the UI). */
  settle(): Promise<unknown> {
    return this.pending;
  }

  private enqueue<T>(work: () => Promise<T>): Promise<T> {
    const next = this.pending.then(work, work);
    this.pending = next.catch((error) => this.showStatus(String(error)));
    return next;
  }

  private buildLayout(): void {
    const toolbar = document.createElement("div");
    toolbar.className = "toolbar";
    toolbar.innerHTML = `
      <button id="btn-play">Play</button>
      <button id="btn-loop">Loop</button>
      <button id="btn-record">Record</button>
      <select id="speed">
        <option value="0.5">0.5x</option>
        <option value="0.75">0.75x</option>
        <option value="1" selected>1x</option>
      </select>
      <span class="group">
        <button id="btn-load">Load</button>
        <button id="btn-delete">Delete</button>
        <button id="btn-clear">Clear</button>
        <button id="btn-preview">Preview</button>
        <button id="btn-query">Query</button>
        <button id="btn-connect">Connect</button>
      </span>
      <span class="group">
        <input id="zoom" type="range" min="1" max="20" step="1" value="1" />
        <button id="btn-overview">Overview</button>
      </span>
      <span id="status"></span>
    `;
    const timeline = document.createElement("div");
    timeline.id = "timeline";
    const feedback = document.createElement("section");
    feedback.id = "feedback";
    feedback.className = "hidden";
    const progress = document.createElement("section");
    progress.id = "progress";
    progress.innerHTML = `
      <div class="chart"><h3>Progression</h3><svg id="doughnut"></svg></div>
      <div class="chart"><h3>Practice History</h3><svg id="history"></svg></div>
    `;
    this.root.append(toolbar, timeline, feedback, progress);
    this.sections = { toolbar, timeline, feedback, progress };

    toolbar.querySelector("#btn-play")!.addEventListener("click", () => this.enqueue(() => this.playFromPlayhead()));
    toolbar.querySelector("#btn-loop")!.addEventListener("click", () => this.enqueue(() => this.loopSelected()));
    toolbar.querySelector("#btn-record")!.addEventListener("click", () => this.enqueue(() => this.recordSelected()));
    toolbar.querySelector("#speed")!.addEventListener("change", (event) => {
      setSpeed(this.state, Number((event.target as HTMLSelectElement).value));
    });
    toolbar.querySelector("#btn-load")!.addEventListener("click", () => {
      loadAutoRegions(this.state);
      this.renderTimeline();
    });
    toolbar.querySelector("#btn-delete")!.addEventListener("click", () => this.enqueue(() => this.deleteSelected()));
    toolbar.querySelector("#btn-clear")!.addEventListener("click", () => {
      clearRegions(this.state);
      this.renderTimeline();
    });
    toolbar.querySelector("#btn-preview")!.addEventListener("click", (event) => {
      this.state.previewEnabled = !this.state.previewEnabled;
      (event.target as HTMLElement).classList.toggle("active", this.state.previewEnabled);
    });
    toolbar.querySelector("#btn-query")!.addEventListener("click", () => this.enqueue(() => this.querySelected()));
    toolbar.querySelector("#btn-connect")!.addEventListener("click", () => this.playConnected());
    toolbar.querySelector("#zoom")!.addEventListener("input", (event) => {
      setZoom(this.state, Number((event.target as HTMLInputElement).value));
      this.renderTimeline();
    });
    toolbar.querySelector("#btn-overview")!.addEventListener("click", () => {
      resetZoom(this.state);
      (toolbar.querySelector("#zoom") as HTMLInputElement).value = "1";
      this.renderTimeline();
    });
  }

  private showStatus(message: string): void {
    const status = this.sections.toolbar.querySelector("#status")!;
    status.textContent = message;
  }

  async loadLesson(lessonId: string): Promise<void> {
    this.lessonId = lessonId;
    const manifest = await this.api.getManifest(lessonId);
    this.state.manifest = manifest;
    loadAutoRegions(this.state);
    applySession(this.state, await this.api.getSession(lessonId));
    if (manifest.media_url) {
      try {
        await this.engine.load(this.api.baseUrl + manifest.media_url);
      } catch {
        this.showStatus("media unavailable; region playback disabled");
      }
    }
    this.renderAll();
  }

  // -- playback -------------------------------------------------------------

  private async handlePlayheadEntered(time: number): Promise<void> {
    const region = this.state.displayedRegions.find((r) => r.start <= time && time < r.end);
    if (!region) return;
    if ((this.state.regionStates[region.id] ?? "to_learn") === "to_learn") {
      applySession(this.state, await this.api.postEvents(this.lessonId, [{ region_id: region.id, kind: "entered" }]));
      this.renderAll();
    }
  }

  async playRegion(regionId: string): Promise<void> {
    const region = regionById(this.state, regionId);
    if (!region) return;
    selectRegion(this.state, regionId);
    seek(this.state, region.start);
    applySession(this.state, await this.api.postEvents(this.lessonId, [{ region_id: regionId, kind: "played" }]));
    this.renderAll();
    this.startRegionPlayback(region);
  }

  private startRegionPlayback(region: RegionJson): void {
    this.engine.play(region.start, region.end, this.state.speed, () => {
      if (this.state.loop && this.state.selectedRegionId === region.id) {
        // restart before anything async so the loop cannot drift
        this.startRegionPlayback(region);
        void this.enqueue(async () => {
          applySession(this.state, await this.api.postEvents(this.lessonId, [{ region_id: region.id, kind: "looped" }]));
          this.renderProgress();
        });
      }
    });
  }

  private async playFromPlayhead(): Promise<void> {
    const end = duration(this.state);
    this.engine.play(this.state.playhead, end, this.state.speed, () => undefined);
  }

  private async loopSelected(): Promise<void> {
    const looping = toggleLoop(this.state);
    this.sections.toolbar.querySelector("#btn-loop")!.classList.toggle("active", looping);
    if (!looping || !this.state.selectedRegionId) return;
    const region = regionById(this.state, this.state.selectedRegionId);
    if (!region) return;
    applySession(this.state, await this.api.postEvents(this.lessonId, [{ region_id: region.id, kind: "looped" }]));
    this.renderAll();
    this.startRegionPlayback(region);
  }

  playConnected(): void {
    const ordered = connectOrder(this.state);
    const playNext = (index: number): void => {
      if (index >= ordered.length) return;
      const region = ordered[index];
      seek(this.state, region.start);
      this.renderTimeline();
      this.engine.play(region.start, region.end, this.state.speed, () => playNext(index + 1));
    };
    playNext(0);
  }

  // -- regions ----------------------------------------------------------------

  private async createRegion(track: Track, start: number, end: number): Promise<void> {
    const response = await this.api.createRegion(this.lessonId, start, end, track);
    applySession(this.state, await this.api.getSession(this.lessonId));
    selectRegion(this.state, response.region.id);
    this.renderAll();
  }

  private async refineRegion(regionId: string, bounds: { start?: number; end?: number }): Promise<void> {
    await this.api.patchRegion(this.lessonId, regionId, bounds);
    applySession(this.state, await this.api.getSession(this.lessonId));
    this.renderAll();
  }

  private async deleteSelected(): Promise<void> {
    const regionId = this.state.selectedRegionId;
    if (!regionId) return;
    await this.api.deleteRegion(this.lessonId, regionId);
    this.state.displayedRegions = this.state.displayedRegions.filter((r) => r.id !== regionId);
    selectRegion(this.state, null);
    applySession(this.state, await this.api.getSession(this.lessonId));
    this.renderAll();
  }

  private async querySelected(): Promise<void> {
    const regionId = this.state.selectedRegionId;
    if (!regionId) {
      this.showStatus("select a region to query");
      return;
    }
    this.state.queryMatches = await this.api.queryRegions(this.lessonId, { rid: regionId });
    this.renderTimeline();
  }

  // -- recording & feedback -----------------------------------------------------

  async recordSelected(): Promise<void> {
    const regionId = this.state.selectedRegionId;
    if (!regionId) {
      this.showStatus("select a region to record");
      return;
    }
    const region = regionById(this.state, regionId);
    if (!region || !region.notes || region.notes.length === 0) {
      this.showStatus("this region has no reference notes to score against");
      return;
    }
    this.state.recordArmed = true;
    this.renderTimeline();
    const seconds = (region.end - region.start) / this.state.speed;
    // reference plays while the user follows along
    this.startRegionPlayback(region);
    let take: RecordedTake;
    try {
      take = await this.engine.record(seconds);
    } finally {
      this.state.recordArmed = false;
      this.engine.stop();
    }
    const response = await this.api.postRecording(
      this.lessonId,
      regionId,
      encodeWavPcm16(take.samples, take.sampleRate),
      this.state.speed,
    );
    await this.applyScoreResponse(response, take);
  }

  private async applyScoreResponse(response: ScoreResponse, take?: RecordedTake): Promise<void> {
    this.state.replay = { response, mix: 0.5, take: take ?? this.state.replay?.take };
    // recolor only from server-confirmed state
    applySession(this.state, await this.api.getSession(this.lessonId));
    this.renderAll();
  }

  private renderFeedback(): void {
    const pane = this.sections.feedback;
    const replay = this.state.replay;
    if (!replay) {
      pane.classList.add("hidden");
      return;
    }
    const { response } = replay;
    const report = response.report;
    const effective = report.overridden && report.manual !== null ? report.manual : report.score;
    pane.classList.remove("hidden");
    pane.innerHTML = `
      <h3>Feedback for <span id="feedback-region">${response.region_id}</span></h3>
      <div class="score-line">
        <span id="score-value">${effective.toFixed(2)}%</span>
        <span id="score-detail">${report.matched} of ${report.target_total} notes</span>
        <span id="score-overridden" class="${report.overridden ? "" : "hidden"}">(manually entered)</span>
      </div>
      <div id="missed-notes">${report.missed.length ? "Missed: " + report.missed.join(", ") : "No missed notes"}</div>
      <svg id="melody-curves"></svg>
      <div class="replay-controls">
        <button id="btn-play-results">Play Results</button>
        <label>Reference <input id="mix" type="range" min="0" max="1" step="0.01" value="${replay.mix}" /> You</label>
        <button id="btn-override">Enter the Score Manually</button>
        <span id="override-flow" class="hidden">
          <input id="override-input" type="number" min="0" max="100" step="0.01" />
          <button id="btn-override-submit">Submit</button>
        </span>
      </div>
    `;
    this.renderReplayCurves();
    pane.querySelector("#btn-play-results")!.addEventListener("click", () => this.playResults());
    pane.querySelector("#mix")!.addEventListener("input", (event) => {
      replay.mix = Number((event.target as HTMLInputElement).value);
      this.engine.setResultsMix(replay.mix);
      this.renderReplayCurves();
    });
    pane.querySelector("#btn-override")!.addEventListener("click", () => {
      pane.querySelector("#override-flow")!.classList.remove("hidden");
    });
    pane.querySelector("#btn-override-submit")!.addEventListener("click", () =>
      this.enqueue(async () => {
        const value = Number((pane.querySelector("#override-input") as HTMLInputElement).value);
        const updated = await this.api.overrideScore(this.lessonId, response.region_id, value);
        await this.applyScoreResponse(updated);
      }),
    );
  }

  private renderReplayCurves(): void {
    const replay = this.state.replay;
    if (!replay) return;
    const svg = this.sections.feedback.querySelector("#melody-curves") as SVGElement | null;
    if (!svg) return;
    const region = regionById(this.state, replay.response.region_id);
    const regionDuration = region ? region.end - region.start : 0;
    const spans = [
      ...(replay.response.time_spans?.target ?? []),
      ...(replay.response.time_spans?.recording ?? []),
    ].filter(([a, b]) => b >= a);
    renderCurves(svg, {
      reference: replay.response.reference_curve,
      user: replay.response.user_curve,
      duration: Math.max(
        regionDuration,
        ...(replay.response.user_curve?.times ?? [0]),
        ...(replay.response.reference_curve?.times ?? [0]),
      ),
      mistakeSpans: spans,
      referenceOpacity: 1 - replay.mix,
      userOpacity: replay.mix,
    });
  }

  private playResults(): void {
    const replay = this.state.replay;
    if (!replay) return;
    const region = regionById(this.state, replay.response.region_id);
    if (!region) return;
    this.engine.playResults(region.start, region.end, replay.take ?? null, replay.mix);
  }

  // -- rendering ---------------------------------------------------------------

  private renderTimeline(): void {
    this.timeline.render(this.state);
    this.sections.toolbar
      .querySelector("#btn-record")!
      .classList.toggle("active", this.state.recordArmed);
  }

  private renderProgress(): void {
    renderDoughnut(this.sections.progress.querySelector("#doughnut") as SVGElement, this.state.summary);
    renderHistory(
      this.sections.progress.querySelector("#history") as SVGElement,
      this.state.history,
      this.state.displayedRegions.map((r) => r.id),
    );
  }

  renderAll(): void {
    this.renderTimeline();
    this.renderFeedback();
    this.renderProgress();
  }
}
