"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class JobOut(BaseModel):
    job_id: str
    status: Literal["queued", "running", "done", "failed"]
    progress: float = 0.0
    stage: str | None = None
    error: str | None = None
    result: str | None = None


class RegionCreate(BaseModel):
    start: float
    end: float
    track: Literal["voice", "instrument"]
    revision: int | None = None


class RegionPatch(BaseModel):
    start: float | None = None
    end: float | None = None
    revision: int | None = None


class RegionOut(BaseModel):
    region: dict
    revision: int


class ScoreOverrideIn(BaseModel):
    score: float = Field(ge=0, le=100)
    revision: int | None = None


class QueryIn(BaseModel):
    rid: str | None = None
    notes: list[int] | None = None


class QueryOut(BaseModel):
    region_ids: list[str]


class EventIn(BaseModel):
    region_id: str
    kind: Literal["entered", "played", "looped", "recorded", "score_overridden"]
    score: float | None = None


class EventsIn(BaseModel):
    events: list[EventIn]
    revision: int | None = None


class ProgressionOut(BaseModel):
    to_learn: int
    started: int
    aced: int


class SessionOut(BaseModel):
    revision: int
    summary: ProgressionOut
    region_states: dict[str, str]
    history: dict[str, dict[str, int]]
    scores: dict[str, list[dict]]
    user_regions: list[dict]
    deleted_ids: list[str]


class ScoreOut(BaseModel):
    region_id: str
    report: dict
    region_state: str
    revision: int
    summary: ProgressionOut
    playback_speed: float | None = None
    time_spans: dict[str, list[list[float]]] | None = None
    user_curve: dict | None = None
    reference_curve: dict | None = None


class OkOut(BaseModel):
    ok: bool = True
    revision: int | None = None
