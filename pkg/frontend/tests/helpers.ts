import type { AudioEngine, RecordedTake } from "../src/audio.js";

/** Deterministic engine: playback segments are finished manually. */
export class FakeAudioEngine implements AudioEngine {
  nextTake: RecordedTake = { samples: new Float32Array(22050), sampleRate: 22050 };
  playCalls: { start: number; end: number; speed: number }[] = [];
  resultsCalls: { start: number; end: number; mix: number }[] = [];
  loadedUrl: string | null = null;
  mix = -1;
  private onEnded: (() => void) | null = null;
  private time = 0;

  async load(url: string): Promise<void> {
    this.loadedUrl = url;
  }

  play(start: number, end: number, speed: number, onEnded: () => void): void {
    this.playCalls.push({ start, end, speed });
    this.time = start;
    this.onEnded = onEnded;
  }

  /** Fire the pending segment-end callback (as the real engine does at region end). */
  finishSegment(): void {
    const callback = this.onEnded;
    this.onEnded = null;
    callback?.();
  }

  stop(): void {
    this.onEnded = null;
  }

  seek(time: number): void {
    this.time = time;
  }

  position(): number {
    return this.time;
  }

  playing(): boolean {
    return this.onEnded !== null;
  }

  async record(seconds: number): Promise<RecordedTake> {
    void seconds;
    return this.nextTake;
  }

  playResults(start: number, end: number, user: RecordedTake | null, mix: number): void {
    void user;
    this.resultsCalls.push({ start, end, mix });
    this.mix = mix;
  }

  setResultsMix(mix: number): void {
    this.mix = mix;
  }

  stopResults(): void {}
}

export function click(element: Element): void {
  element.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

export function mousedown(element: Element, clientX: number): void {
  element.dispatchEvent(new MouseEvent("mousedown", { bubbles: true, clientX }));
}

export function mousemove(element: Element, clientX: number): void {
  element.dispatchEvent(new MouseEvent("mousemove", { bubbles: true, clientX }));
}

export function mouseup(element: Element, clientX: number): void {
  element.dispatchEvent(new MouseEvent("mouseup", { bubbles: true, clientX }));
}
