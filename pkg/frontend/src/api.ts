// Typed client for the lessonlab HTTP API. The UI performs no musical
// analysis of its own; every score, note, and state transition comes
// from these endpoints.

import type {
  JobJson,
  Manifest,
  PracticeEvent,
  RegionJson,
  ScoreResponse,
  SessionJson,
  Track,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parse<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      detail = ((await response.json()) as { detail?: string }).detail ?? detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(public baseUrl: string = "", public userId: string = "default") {}

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    return { "X-User-Id": this.userId, ...extra };
  }

  private json(body: unknown): RequestInit {
    return {
      method: "POST",
      headers: this.headers({ "Content-Type": "application/json" }),
      body: JSON.stringify(body),
    };
  }

  async listLessons(): Promise<{ lesson_id: string; duration: number }[]> {
    const data = await parse<{ lessons: { lesson_id: string; duration: number }[] }>(
      await fetch(`${this.baseUrl}/api/lessons`, { headers: this.headers() }),
    );
    return data.lessons;
  }

  async getManifest(lessonId: string): Promise<Manifest> {
    return parse(await fetch(`${this.baseUrl}/api/lessons/${lessonId}`, { headers: this.headers() }));
  }

  mediaUrl(lessonId: string): string {
    return `${this.baseUrl}/api/lessons/${lessonId}/media`;
  }

  async getJob(jobId: string): Promise<JobJson> {
    return parse(await fetch(`${this.baseUrl}/api/jobs/${jobId}`, { headers: this.headers() }));
  }

  async uploadLesson(files: { mix?: Blob; voice?: Blob; instrument?: Blob; media?: Blob }): Promise<JobJson> {
    const form = new FormData();
    for (const [name, blob] of Object.entries(files)) {
      if (blob) form.append(name, blob, `${name}.wav`);
    }
    return parse(await fetch(`${this.baseUrl}/api/lessons`, { method: "POST", headers: this.headers(), body: form }));
  }

  async getSession(lessonId: string): Promise<SessionJson> {
    return parse(await fetch(`${this.baseUrl}/api/lessons/${lessonId}/session`, { headers: this.headers() }));
  }

  async postEvents(lessonId: string, events: PracticeEvent[]): Promise<SessionJson> {
    return parse(await fetch(`${this.baseUrl}/api/lessons/${lessonId}/events`, this.json({ events })));
  }

  async createRegion(lessonId: string, start: number, end: number, track: Track): Promise<{ region: RegionJson; revision: number }> {
    return parse(await fetch(`${this.baseUrl}/api/lessons/${lessonId}/regions`, this.json({ start, end, track })));
  }

  async patchRegion(lessonId: string, regionId: string, bounds: { start?: number; end?: number }): Promise<{ region: RegionJson; revision: number }> {
    return parse(
      await fetch(`${this.baseUrl}/api/lessons/${lessonId}/regions/${regionId}`, {
        method: "PATCH",
        headers: this.headers({ "Content-Type": "application/json" }),
        body: JSON.stringify(bounds),
      }),
    );
  }

  async deleteRegion(lessonId: string, regionId: string): Promise<void> {
    await parse(
      await fetch(`${this.baseUrl}/api/lessons/${lessonId}/regions/${regionId}`, {
        method: "DELETE",
        headers: this.headers(),
      }),
    );
  }

  async postRecording(lessonId: string, regionId: string, wav: ArrayBuffer, playbackSpeed: number): Promise<ScoreResponse> {
    const form = new FormData();
    form.append("recording", new Blob([wav], { type: "audio/wav" }), "take.wav");
    form.append("playback_speed", String(playbackSpeed));
    return parse(
      await fetch(`${this.baseUrl}/api/lessons/${lessonId}/regions/${regionId}/recordings`, {
        method: "POST",
        headers: this.headers(),
        body: form,
      }),
    );
  }

  async overrideScore(lessonId: string, regionId: string, score: number): Promise<ScoreResponse> {
    return parse(
      await fetch(`${this.baseUrl}/api/lessons/${lessonId}/regions/${regionId}/score-override`, this.json({ score })),
    );
  }

  async queryRegions(lessonId: string, query: { rid?: string; notes?: number[] }): Promise<string[]> {
    const data = await parse<{ region_ids: string[] }>(
      await fetch(`${this.baseUrl}/api/lessons/${lessonId}/regions/query`, this.json(query)),
    );
    return data.region_ids;
  }
}
