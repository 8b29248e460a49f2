// JSON shapes served by the lessonlab HTTP API.

export type Track = "voice" | "instrument";
export type RegionState = "to_learn" | "started" | "aced";

export interface NoteJson {
  midi: number;
  onset: number;
  duration: number;
  mean_unrounded_midi?: number;
}

export interface CurveJson {
  times: number[];
  midi: (number | null)[];
}

export interface ContourJson {
  hop: number;
  times: number[];
  f0: (number | null)[];
  confidence: number[];
}

export interface RegionJson {
  id: string;
  start: number;
  end: number;
  track: Track;
  source: "auto" | "user";
  state: RegionState;
  notes?: NoteJson[];
  curve?: CurveJson;
  contour?: ContourJson;
}

export interface Manifest {
  lesson_id: string;
  duration: number;
  sample_rate: number;
  media_url: string | null;
  voice_regions: RegionJson[];
  instrument_regions: RegionJson[];
  waveform_peaks: Record<Track, [number, number][]>;
}

export interface JobJson {
  job_id: string;
  status: "queued" | "running" | "done" | "failed";
  progress: number;
  stage?: string | null;
  error?: string | null;
  result?: string | null;
}

export interface ReportJson {
  score: number;
  matched: number;
  target_total: number;
  missed: string[];
  spans: { t: [number, number]; r: [number, number] }[];
  overridden: boolean;
  manual: number | null;
}

export interface Progression {
  to_learn: number;
  started: number;
  aced: number;
}

export interface HistoryCounters {
  played: number;
  looped: number;
  recorded: number;
  aced: number;
}

export interface SessionJson {
  revision: number;
  summary: Progression;
  region_states: Record<string, RegionState>;
  history: Record<string, HistoryCounters>;
  scores: Record<string, ReportJson[]>;
  user_regions: RegionJson[];
  deleted_ids: string[];
}

export interface ScoreResponse {
  region_id: string;
  report: ReportJson;
  region_state: RegionState;
  revision: number;
  summary: Progression;
  playback_speed?: number | null;
  time_spans?: { target: [number, number][]; recording: [number, number][] } | null;
  user_curve?: CurveJson | null;
  reference_curve?: CurveJson | null;
}

export type EventKind = "entered" | "played" | "looped" | "recorded" | "score_overridden";

export interface PracticeEvent {
  region_id: string;
  kind: EventKind;
  score?: number;
}
