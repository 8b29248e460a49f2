// Playback and capture. The engine is an interface so tests can swap in
// a deterministic fake; the browser implementation uses a media element
// for lesson playback (preserving pitch at slow speeds where supported)
// and WebAudio for capture and result replay.

export interface RecordedTake {
  samples: Float32Array;
  sampleRate: number;
}

export interface AudioEngine {
  load(mediaUrl: string): Promise<void>;
  /** Play [start, end) at the given speed; onEnded fires once at the end. */
  play(start: number, end: number, speed: number, onEnded: () => void): void;
  stop(): void;
  seek(time: number): void;
  position(): number;
  playing(): boolean;
  /** Capture `seconds` of the user's input channel. */
  record(seconds: number): Promise<RecordedTake>;
  /** Replay the reference interval and the user's take together;
   * mix 0 = reference only, 1 = user only. */
  playResults(start: number, end: number, user: RecordedTake | null, mix: number): void;
  setResultsMix(mix: number): void;
  stopResults(): void;
}

export class WebAudioEngine implements AudioEngine {
  private media: HTMLAudioElement;
  private context: AudioContext | null = null;
  private watchdog: number | null = null;
  private segmentEnd = 0;
  private onSegmentEnd: (() => void) | null = null;
  private resultGains: GainNode[] = [];
  private resultSources: AudioBufferSourceNode[] = [];

  constructor(media?: HTMLAudioElement) {
    this.media = media ?? new Audio();
    this.media.preload = "auto";
    const anyMedia = this.media as HTMLAudioElement & { preservesPitch?: boolean };
    if ("preservesPitch" in anyMedia) anyMedia.preservesPitch = true;
  }

  private ensureContext(): AudioContext {
    if (!this.context) this.context = new AudioContext();
    return this.context;
  }

  async load(mediaUrl: string): Promise<void> {
    this.media.src = mediaUrl;
    await new Promise<void>((resolve, reject) => {
      this.media.oncanplay = () => resolve();
      this.media.onerror = () => reject(new Error("media failed to load"));
      this.media.load();
    });
  }

  play(start: number, end: number, speed: number, onEnded: () => void): void {
    this.stop();
    this.media.currentTime = start;
    this.media.playbackRate = speed;
    this.segmentEnd = end;
    this.onSegmentEnd = onEnded;
    void this.media.play();
    const tick = () => {
      if (this.media.currentTime >= this.segmentEnd || this.media.ended) {
        const callback = this.onSegmentEnd;
        this.onSegmentEnd = null;
        this.media.pause();
        if (callback) callback(); // same frame, so loops restart without drift
        return;
      }
      this.watchdog = requestAnimationFrame(tick);
    };
    this.watchdog = requestAnimationFrame(tick);
  }

  stop(): void {
    if (this.watchdog !== null) cancelAnimationFrame(this.watchdog);
    this.watchdog = null;
    this.onSegmentEnd = null;
    this.media.pause();
  }

  seek(time: number): void {
    this.media.currentTime = time;
  }

  position(): number {
    return this.media.currentTime;
  }

  playing(): boolean {
    return !this.media.paused;
  }

  async record(seconds: number): Promise<RecordedTake> {
    const context = this.ensureContext();
    const stream = await navigator.mediaDevices.getUserMedia({
      audio: { echoCancellation: false, noiseSuppression: false, autoGainControl: false },
    });
    const source = context.createMediaStreamSource(stream);
    const processor = context.createScriptProcessor(4096, 1, 1);
    const chunks: Float32Array[] = [];
    const target = Math.ceil(seconds * context.sampleRate);
    let captured = 0;
    const done = new Promise<void>((resolve) => {
      processor.onaudioprocess = (event) => {
        const block = event.inputBuffer.getChannelData(0);
        chunks.push(new Float32Array(block));
        captured += block.length;
        if (captured >= target) resolve();
      };
    });
    source.connect(processor);
    processor.connect(context.destination);
    await done;
    processor.disconnect();
    source.disconnect();
    stream.getTracks().forEach((track) => track.stop());
    const samples = new Float32Array(Math.min(captured, target));
    let offset = 0;
    for (const chunk of chunks) {
      const usable = Math.min(chunk.length, samples.length - offset);
      if (usable <= 0) break;
      samples.set(chunk.subarray(0, usable), offset);
      offset += usable;
    }
    return { samples, sampleRate: context.sampleRate };
  }

  playResults(start: number, end: number, user: RecordedTake | null, mix: number): void {
    this.stopResults();
    // reference leg: the media element replaying the region interval
    this.media.volume = 1 - mix;
    this.play(start, end, 1.0, () => {
      this.media.volume = 1;
    });
    // user leg: the captured take through a gain node
    if (user && user.samples.length > 0) {
      const context = this.ensureContext();
      const buffer = context.createBuffer(1, user.samples.length, user.sampleRate);
      buffer.copyToChannel(new Float32Array(user.samples), 0);
      const source = context.createBufferSource();
      source.buffer = buffer;
      const gain = context.createGain();
      gain.gain.value = mix;
      source.connect(gain);
      gain.connect(context.destination);
      this.resultSources.push(source);
      this.resultGains.push(gain);
      source.start();
    }
  }

  setResultsMix(mix: number): void {
    this.media.volume = 1 - mix;
    if (this.resultGains[0]) this.resultGains[0].gain.value = mix;
  }

  stopResults(): void {
    for (const source of this.resultSources) {
      try {
        source.stop();
      } catch {
        // already stopped
      }
    }
    this.resultSources = [];
    this.resultGains = [];
  }
}
