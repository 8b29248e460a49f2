"""HTTP service: preprocessing jobs, lesson manifests, region CRUD,
recording scoring, melody queries, and session state."""

from __future__ import annotations

import json
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, File, Form, Header, HTTPException, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from ..audio import decode_wav, resample
from ..config import AppConfig
from ..errors import (
    EmptyInputError,
    EmptyQueryError,
    EmptyTargetError,
    FormatError,
    LessonlabError,
    RegionNotFoundError,
    RevisionConflictError,
    SeparatorConfigError,
    StemMismatchError,
    UnsupportedFormatError,
    WrongTrackError,
)
from ..manifest import LessonManifest, RegionData
from ..notes import MelodyCurve, Note, NoteSequence, buffer_to_notes
from ..pipeline import estimator_from_config, extract_region_data, preprocess_lesson
from ..scoring import ScoreReport, apply_manual_score, query_regions, score_performance, spans_to_time
from ..segmentation import Region
from ..session import SessionState, SessionStore
from .jobs import JobRegistry
from .schemas import (
    EventsIn,
    JobOut,
    OkOut,
    ProgressionOut,
    QueryIn,
    QueryOut,
    RegionCreate,
    RegionOut,
    RegionPatch,
    ScoreOut,
    ScoreOverrideIn,
    SessionOut,
)
from .storage import LessonStore

_ERROR_STATUS: list[tuple[type, int]] = [
    (RegionNotFoundError, 404),
    (RevisionConflictError, 409),
    (EmptyTargetError, 409),
    (WrongTrackError, 409),
    (EmptyQueryError, 400),
    (FormatError, 400),
    (UnsupportedFormatError, 400),
    (EmptyInputError, 400),
    (StemMismatchError, 400),
    (SeparatorConfigError, 400),
]


def _curve_json(curve: MelodyCurve | None) -> dict | None:
    if curve is None:
        return None
    return {
        "times": [round(t, 4) for t in curve.times],
        "midi": [None if v is None else round(v, 4) for v in curve.unrounded_midi],
    }


def create_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig()
    store = LessonStore(config.storage_path())
    sessions = SessionStore(config.storage_path() / "sessions")
    jobs = JobRegistry(workers=1)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        jobs.wait_all()

    app = FastAPI(title="lessonlab", version="0.1.0", lifespan=lifespan)
    app.state.config = config
    app.state.store = store
    app.state.sessions = sessions
    app.state.jobs = jobs

    @app.exception_handler(LessonlabError)
    async def domain_error(request: Request, exc: LessonlabError):
        for kind, status in _ERROR_STATUS:
            if isinstance(exc, kind):
                return JSONResponse({"detail": str(exc)}, status_code=status)
        return JSONResponse({"detail": str(exc)}, status_code=500)

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse({"detail": str(exc.errors())}, status_code=400)

    def manifest_or_404(lesson_id: str) -> LessonManifest:
        try:
            return store.manifest(lesson_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown lesson {lesson_id}")

    def load_session(lesson_id: str, user_id: str) -> SessionState:
        manifest = manifest_or_404(lesson_id)
        return sessions.load(lesson_id, user_id, manifest.region_ids())

    def effective_regions(lesson_id: str, session: SessionState) -> dict[str, RegionData]:
        manifest = manifest_or_404(lesson_id)
        regions = {rd.region.id: rd for rd in manifest.all_regions()}
        for data in session.user_regions:
            rd = RegionData.from_json(data)
            regions[rd.region.id] = rd
        for rid in session.deleted_ids:
            regions.pop(rid, None)
        return regions

    def region_or_404(lesson_id: str, session: SessionState, rid: str) -> RegionData:
        rd = effective_regions(lesson_id, session).get(rid)
        if rd is None:
            raise HTTPException(status_code=404, detail=f"unknown region {rid}")
        return rd

    def check_revision(session: SessionState, revision: int | None) -> None:
        if revision is not None and revision != session.revision:
            raise RevisionConflictError(
                f"session revision is {session.revision}, request carried {revision}"
            )

    def summary_out(lesson_id: str, session: SessionState) -> ProgressionOut:
        ids = list(effective_regions(lesson_id, session))
        return ProgressionOut(**session.summary(ids))

    def extract_for_region(lesson_id: str, region: Region) -> RegionData:
        return extract_region_data(store.stems(lesson_id), region, config)

    @app.get("/api/health")
    def health():
        return {"ok": True}

    # -- preprocessing -------------------------------------------------

    @app.post("/api/lessons", status_code=202, response_model=JobOut)
    async def create_lesson(
        mix: UploadFile | None = File(None),
        voice: UploadFile | None = File(None),
        instrument: UploadFile | None = File(None),
        media: UploadFile | None = File(None),
    ):
        has_stems = voice is not None and instrument is not None
        if mix is None and not has_stems:
            raise HTTPException(
                status_code=400, detail="upload either 'mix' or both 'voice' and 'instrument'"
            )
        lesson_id = store.new_lesson_id()
        upload_dir = store.uploads_dir / lesson_id
        upload_dir.mkdir(parents=True, exist_ok=True)
        paths: dict[str, Path | None] = {}
        total = 0
        for name, upload in (("mix", mix), ("voice", voice), ("instrument", instrument), ("media", media)):
            if upload is None:
                paths[name] = None
                continue
            data = await upload.read()
            total += len(data)
            if total > config.max_upload_bytes:
                raise HTTPException(status_code=413, detail="upload exceeds configured limit")
            suffix = Path(upload.filename or name).suffix or ".wav"
            path = upload_dir / f"{name}{suffix}"
            path.write_bytes(data)
            paths[name] = path

        def work(progress) -> str:
            preprocess_lesson(
                lesson_id,
                store.lesson_dir(lesson_id),
                config,
                mix_path=paths["mix"],
                voice_path=paths["voice"],
                instrument_path=paths["instrument"],
                media_path=paths["media"],
                progress=progress,
            )
            return lesson_id

        return JobOut(**jobs.submit(work))

    @app.get("/api/jobs/{job_id}", response_model=JobOut)
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        return JobOut(**job.to_json())

    # -- lesson resources ----------------------------------------------

    @app.get("/api/lessons")
    def list_lessons():
        lessons = []
        for path in sorted(store.lessons_dir.glob("*/manifest.json")):
            data = json.loads(path.read_text())
            lessons.append(
                {
                    "lesson_id": data["lesson_id"],
                    "duration": data["duration"],
                    "created_at": data.get("created_at", ""),
                }
            )
        return {"lessons": lessons}

    @app.get("/api/lessons/{lesson_id}")
    def get_manifest(lesson_id: str):
        try:
            body = store.manifest_bytes(lesson_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown lesson {lesson_id}")
        return Response(content=body, media_type="application/json")

    @app.get("/api/lessons/{lesson_id}/media")
    def get_media(lesson_id: str):
        path = store.media_path(lesson_id)
        if path is None:
            raise HTTPException(status_code=404, detail=f"no media for lesson {lesson_id}")
        media_type = "audio/wav" if path.suffix == ".wav" else None
        return FileResponse(path, media_type=media_type)

    # -- region CRUD ----------------------------------------------------

    def _validate_bounds(start: float, end: float, duration: float) -> None:
        if not (0 <= start < end <= duration + 1e-6):
            raise HTTPException(
                status_code=400,
                detail=f"region bounds [{start}, {end}] invalid for duration {duration:.3f}",
            )

    @app.get("/api/lessons/{lesson_id}/regions/{rid}", response_model=RegionOut)
    def get_region(lesson_id: str, rid: str, x_user_id: str = Header("default")):
        session = load_session(lesson_id, x_user_id)
        rd = region_or_404(lesson_id, session, rid)
        return RegionOut(region=rd.to_json(), revision=session.revision)

    @app.post("/api/lessons/{lesson_id}/regions", response_model=RegionOut)
    def create_region(lesson_id: str, body: RegionCreate, x_user_id: str = Header("default")):
        manifest = manifest_or_404(lesson_id)
        _validate_bounds(body.start, body.end, manifest.duration)
        session = load_session(lesson_id, x_user_id)
        check_revision(session, body.revision)
        session.user_region_seq += 1
        region = Region(
            id=f"user-{session.user_region_seq:03d}",
            start=body.start,
            end=body.end,
            track=body.track,
            source="user",
        )
        rd = extract_for_region(lesson_id, region) if region.track == "instrument" else RegionData(region=region)
        session.user_regions.append(rd.to_json())
        session.register_region(region.id)
        session.revision += 1
        sessions.save(session)
        return RegionOut(region=rd.to_json(), revision=session.revision)

    @app.patch("/api/lessons/{lesson_id}/regions/{rid}", response_model=RegionOut)
    def patch_region(lesson_id: str, rid: str, body: RegionPatch, x_user_id: str = Header("default")):
        manifest = manifest_or_404(lesson_id)
        session = load_session(lesson_id, x_user_id)
        check_revision(session, body.revision)
        rd = region_or_404(lesson_id, session, rid)
        start = rd.region.start if body.start is None else body.start
        end = rd.region.end if body.end is None else body.end
        _validate_bounds(start, end, manifest.duration)
        region = Region(
            id=rid, start=start, end=end, track=rd.region.track, source="user", state=rd.region.state
        )
        updated = (
            extract_for_region(lesson_id, region)
            if region.track == "instrument"
            else RegionData(region=region)
        )
        session.user_regions = [r for r in session.user_regions if r["id"] != rid]
        session.user_regions.append(updated.to_json())
        session.register_region(rid)
        session.revision += 1
        sessions.save(session)
        return RegionOut(region=updated.to_json(), revision=session.revision)

    @app.delete("/api/lessons/{lesson_id}/regions/{rid}", response_model=OkOut)
    def delete_region(
        lesson_id: str, rid: str, revision: int | None = None, x_user_id: str = Header("default")
    ):
        session = load_session(lesson_id, x_user_id)
        check_revision(session, revision)
        region_or_404(lesson_id, session, rid)
        owned = [r for r in session.user_regions if r["id"] == rid]
        if owned:
            session.user_regions = [r for r in session.user_regions if r["id"] != rid]
        if not owned or rid in {rd.region.id for rd in manifest_or_404(lesson_id).all_regions()}:
            session.deleted_ids.append(rid)
        session.revision += 1
        sessions.save(session)
        return OkOut(ok=True, revision=session.revision)

    # -- recording, scoring, querying ------------------------------------

    @app.post("/api/lessons/{lesson_id}/regions/{rid}/recordings", response_model=ScoreOut)
    async def post_recording(
        lesson_id: str,
        rid: str,
        recording: UploadFile = File(...),
        playback_speed: float = Form(1.0),
        revision: int | None = Form(None),
        x_user_id: str = Header("default"),
    ):
        session = load_session(lesson_id, x_user_id)
        check_revision(session, revision)
        rd = region_or_404(lesson_id, session, rid)
        if rd.region.track != "instrument" or rd.notes is None or len(rd.notes) == 0:
            raise EmptyTargetError(f"region {rid} has no reference notes to score against")
        data = await recording.read()
        if len(data) > config.max_upload_bytes:
            raise HTTPException(status_code=413, detail="recording exceeds upload limit")
        buf = resample(decode_wav(data), config.sample_rate)
        if buf.duration > config.max_recording_seconds:
            raise HTTPException(
                status_code=413,
                detail=f"recording longer than configured cap of {config.max_recording_seconds}s",
            )
        user_notes, user_curve = buffer_to_notes(
            buf,
            f_min=config.f_min,
            f_max=config.f_max,
            min_confidence=config.min_confidence,
            estimator=estimator_from_config(config),
            source="user_recording",
        )
        report = score_performance(rd.notes, user_notes)
        target_spans, recording_spans = spans_to_time(report.mismatch_spans, rd.notes, user_notes)
        session.scores.setdefault(rid, []).append(
            report.to_json() | {"playback_speed": playback_speed}
        )
        session.apply(rid, "recorded", score=report.effective_score)
        sessions.save(session)
        return ScoreOut(
            region_id=rid,
            report=report.to_json(),
            region_state=session.region_states[rid],
            revision=session.revision,
            summary=summary_out(lesson_id, session),
            playback_speed=playback_speed,
            time_spans={
                "target": [list(span) for span in target_spans],
                "recording": [list(span) for span in recording_spans],
            },
            user_curve=_curve_json(user_curve),
            reference_curve=_curve_json(rd.curve),
        )

    @app.post("/api/lessons/{lesson_id}/regions/{rid}/score-override", response_model=ScoreOut)
    def override_score(
        lesson_id: str, rid: str, body: ScoreOverrideIn, x_user_id: str = Header("default")
    ):
        session = load_session(lesson_id, x_user_id)
        check_revision(session, body.revision)
        rd = region_or_404(lesson_id, session, rid)
        attempts = session.scores.get(rid, [])
        if attempts:
            previous = ScoreReport.from_json(attempts[-1])
        elif rd.notes is not None and len(rd.notes) > 0:
            previous = score_performance(rd.notes, NoteSequence(notes=(), source="user_recording"))
        else:
            raise EmptyTargetError(f"region {rid} has no reference notes to score against")
        report = apply_manual_score(previous, body.score)
        session.scores.setdefault(rid, []).append(report.to_json())
        session.apply(rid, "score_overridden", score=report.effective_score)
        sessions.save(session)
        return ScoreOut(
            region_id=rid,
            report=report.to_json(),
            region_state=session.region_states[rid],
            revision=session.revision,
            summary=summary_out(lesson_id, session),
        )

    @app.post("/api/lessons/{lesson_id}/regions/query", response_model=QueryOut)
    def query_lesson_regions(lesson_id: str, body: QueryIn, x_user_id: str = Header("default")):
        session = load_session(lesson_id, x_user_id)
        regions = effective_regions(lesson_id, session)
        candidates = sorted(
            (
                (rd.region, rd.notes)
                for rd in regions.values()
                if rd.region.track == "instrument" and rd.notes is not None
            ),
            key=lambda pair: pair[0].start,
        )
        if body.rid is not None:
            rd = region_or_404(lesson_id, session, body.rid)
            if rd.notes is None or len(rd.notes) == 0:
                raise EmptyQueryError(f"region {body.rid} has no notes to query with")
            query_seq = rd.notes
        elif body.notes:
            query_seq = NoteSequence(
                notes=tuple(
                    Note(midi=m, onset=i * 0.1, duration=0.1, mean_unrounded_midi=float(m))
                    for i, m in enumerate(body.notes)
                )
            )
        else:
            raise HTTPException(status_code=400, detail="query needs 'rid' or 'notes'")
        matches = query_regions(query_seq, candidates, config.query_match_threshold)
        return QueryOut(region_ids=[region.id for region in matches])

    # -- session ---------------------------------------------------------

    @app.post("/api/lessons/{lesson_id}/events", response_model=SessionOut)
    def post_events(lesson_id: str, body: EventsIn, x_user_id: str = Header("default")):
        session = load_session(lesson_id, x_user_id)
        check_revision(session, body.revision)
        for event in body.events:
            session.apply(event.region_id, event.kind, score=event.score)
        if body.events:
            sessions.save(session)
        return session_out(lesson_id, session)

    @app.get("/api/lessons/{lesson_id}/session", response_model=SessionOut)
    def get_session(lesson_id: str, x_user_id: str = Header("default")):
        session = load_session(lesson_id, x_user_id)
        return session_out(lesson_id, session)

    def session_out(lesson_id: str, session: SessionState) -> SessionOut:
        return SessionOut(
            revision=session.revision,
            summary=summary_out(lesson_id, session),
            region_states=session.region_states,
            history=session.history,
            scores=session.scores,
            user_regions=session.user_regions,
            deleted_ids=session.deleted_ids,
        )

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/app", StaticFiles(directory=config.static_dir, html=True), name="app")

    return app
