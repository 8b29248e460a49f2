import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from lessonlab.audio import AudioBuffer, decode_wav, encode_wav
from lessonlab.config import AppConfig
from lessonlab.pipeline import preprocess_lesson
from lessonlab.service import create_app
from lessonlab.synth import make_lesson, sine_tone


@pytest.fixture(scope="module")
def lesson():
    return make_lesson(seed=3, target_duration=40.0, repeat_phrase_every=2)


@pytest.fixture(scope="module")
def served(tmp_path_factory, lesson):
    """A preprocessed lesson behind a live app."""
    root = tmp_path_factory.mktemp("storage")
    config = AppConfig(storage_root=str(root))
    stems_dir = tmp_path_factory.mktemp("stems")
    (stems_dir / "voice.wav").write_bytes(encode_wav(lesson.stems.voice, "float32"))
    (stems_dir / "instrument.wav").write_bytes(encode_wav(lesson.stems.instrument, "float32"))
    preprocess_lesson(
        "demo",
        root / "lessons" / "demo",
        config,
        voice_path=stems_dir / "voice.wav",
        instrument_path=stems_dir / "instrument.wav",
    )
    app = create_app(config)
    with TestClient(app) as client:
        yield client, config


def region_audio(config, manifest, region_index=0):
    lesson_dir = config.storage_path() / "lessons" / manifest["lesson_id"] / "stems"
    instrument = decode_wav((lesson_dir / "instrument.wav").read_bytes())
    region = manifest["instrument_regions"][region_index]
    sr = instrument.sample_rate
    piece = AudioBuffer(
        instrument.samples[round(region["start"] * sr) : round(region["end"] * sr)], sr
    )
    return region, encode_wav(piece, "float32")


def fresh_user(client, suffix):
    return {"X-User-Id": f"user-{suffix}"}


class TestUploadFlow:
    def test_stems_upload_to_manifest(self, served, lesson):
        client, config = served
        response = client.post(
            "/api/lessons",
            files={
                "voice": ("voice.wav", encode_wav(lesson.stems.voice, "float32"), "audio/wav"),
                "instrument": ("instrument.wav", encode_wav(lesson.stems.instrument, "float32"), "audio/wav"),
            },
        )
        assert response.status_code == 202
        job = response.json()
        assert job["status"] == "queued"
        for _ in range(600):
            job = client.get(f"/api/jobs/{job['job_id']}").json()
            if job["status"] in ("done", "failed"):
                break
            time.sleep(0.05)
        assert job["status"] == "done"
        manifest = client.get(f"/api/lessons/{job['result']}").json()
        assert manifest["instrument_regions"]
        for region in manifest["instrument_regions"]:
            assert "notes" in region and "curve" in region

    def test_empty_body_400(self, served):
        client, _ = served
        assert client.post("/api/lessons").status_code == 400

    def test_unknown_job_404(self, served):
        client, _ = served
        assert client.get("/api/jobs/nope").status_code == 404

    def test_undecodable_upload_fails_job(self, served):
        client, _ = served
        response = client.post(
            "/api/lessons", files={"mix": ("mix.wav", b"garbage bytes", "audio/wav")}
        )
        assert response.status_code == 202
        job_id = response.json()["job_id"]
        for _ in range(200):
            job = client.get(f"/api/jobs/{job_id}").json()
            if job["status"] in ("done", "failed"):
                break
            time.sleep(0.05)
        assert job["status"] == "failed"
        assert job["error"]


class TestManifest:
    def test_byte_identical_reads(self, served):
        client, _ = served
        first = client.get("/api/lessons/demo")
        second = client.get("/api/lessons/demo")
        assert first.status_code == 200
        assert first.content == second.content

    def test_instrument_regions_carry_notes_curve_contour(self, served):
        client, _ = served
        manifest = client.get("/api/lessons/demo").json()
        for region in manifest["instrument_regions"]:
            assert region["notes"]
            assert len(region["curve"]["times"]) == len(region["curve"]["midi"])
            contour = region["contour"]
            assert len(contour["times"]) == len(contour["f0"]) == len(contour["confidence"])
            assert all(0.0 <= c <= 1.0 for c in contour["confidence"])
            # voiced frames carry f0, unvoiced carry null, matching the curve grid
            assert [v is None for v in contour["f0"]] == [v is None for v in region["curve"]["midi"]]

    def test_waveform_peaks_cover_every_window(self, served):
        client, _ = served
        manifest = client.get("/api/lessons/demo").json()
        for track in ("voice", "instrument"):
            peaks = manifest["waveform_peaks"][track]
            assert abs(len(peaks) - manifest["duration"] / 0.02) <= 1
            assert all(low <= high for low, high in peaks)

    def test_unknown_lesson_404(self, served):
        client, _ = served
        assert client.get("/api/lessons/missing").status_code == 404

    def test_listing(self, served):
        client, _ = served
        lessons = client.get("/api/lessons").json()["lessons"]
        assert any(entry["lesson_id"] == "demo" for entry in lessons)

    def test_media_range_request(self, served):
        client, _ = served
        response = client.get("/api/lessons/demo/media", headers={"Range": "bytes=0-99"})
        assert response.status_code == 206
        assert len(response.content) == 100

    def test_media_full(self, served):
        client, _ = served
        response = client.get("/api/lessons/demo/media")
        assert response.status_code == 200
        assert response.content[:4] == b"RIFF"


class TestRegionCrud:
    def test_create_instrument_region_extracts_notes(self, served):
        client, config = served
        manifest = client.get("/api/lessons/demo").json()
        source = manifest["instrument_regions"][0]
        response = client.post(
            "/api/lessons/demo/regions",
            json={"start": source["start"], "end": source["end"], "track": "instrument"},
            headers=fresh_user(client, "crud"),
        )
        assert response.status_code == 200
        region = response.json()["region"]
        assert region["source"] == "user"
        assert [n["midi"] for n in region["notes"]] == [n["midi"] for n in source["notes"]]

    def test_patch_recomputes_over_wider_slice(self, served):
        client, _ = served
        manifest = client.get("/api/lessons/demo").json()
        source = manifest["instrument_regions"][1]
        headers = fresh_user(client, "patch")
        created = client.post(
            "/api/lessons/demo/regions",
            json={"start": source["start"] + 0.4, "end": source["end"] - 0.4, "track": "instrument"},
            headers=headers,
        ).json()["region"]
        patched = client.patch(
            f"/api/lessons/demo/regions/{created['id']}",
            json={"start": source["start"], "end": source["end"]},
            headers=headers,
        )
        assert patched.status_code == 200
        assert len(patched.json()["region"]["notes"]) >= len(created["notes"])

    def test_patch_auto_region_shadows_it(self, served):
        client, _ = served
        manifest = client.get("/api/lessons/demo").json()
        source = manifest["instrument_regions"][2]
        headers = fresh_user(client, "shadow")
        response = client.patch(
            f"/api/lessons/demo/regions/{source['id']}",
            json={"end": source["end"] - 0.2},
            headers=headers,
        )
        assert response.status_code == 200
        assert response.json()["region"]["id"] == source["id"]
        assert response.json()["region"]["source"] == "user"
        # the manifest on disk is untouched
        again = client.get("/api/lessons/demo").json()
        assert again["instrument_regions"][2]["end"] == source["end"]

    def test_delete_then_get_404(self, served):
        client, _ = served
        headers = fresh_user(client, "delete")
        manifest = client.get("/api/lessons/demo").json()
        rid = manifest["instrument_regions"][0]["id"]
        assert client.get(f"/api/lessons/demo/regions/{rid}", headers=headers).status_code == 200
        assert client.delete(f"/api/lessons/demo/regions/{rid}", headers=headers).status_code == 200
        assert client.get(f"/api/lessons/demo/regions/{rid}", headers=headers).status_code == 404
        # other users still see the auto region
        assert client.get(f"/api/lessons/demo/regions/{rid}", headers=fresh_user(client, "other")).status_code == 200

    def test_inverted_bounds_400(self, served):
        client, _ = served
        response = client.post(
            "/api/lessons/demo/regions",
            json={"start": 5.0, "end": 2.0, "track": "instrument"},
            headers=fresh_user(client, "bounds"),
        )
        assert response.status_code == 400

    def test_unknown_region_404(self, served):
        client, _ = served
        assert client.patch("/api/lessons/demo/regions/ghost", json={"end": 3.0}).status_code == 404


class TestRecordings:
    def test_own_audio_scores_100_and_aces(self, served):
        client, config = served
        headers = fresh_user(client, "perfect")
        manifest = client.get("/api/lessons/demo").json()
        region, wav = region_audio(config, manifest)
        response = client.post(
            f"/api/lessons/demo/regions/{region['id']}/recordings",
            files={"recording": ("take.wav", wav, "audio/wav")},
            data={"playback_speed": "0.75"},
            headers=headers,
        )
        assert response.status_code == 200
        body = response.json()
        assert body["report"]["score"] == 100.0
        assert body["report"]["missed"] == []
        assert body["region_state"] == "aced"
        assert body["playback_speed"] == 0.75
        assert body["reference_curve"]["times"]
        summary = client.get("/api/lessons/demo/session", headers=headers).json()["summary"]
        total = summary["to_learn"] + summary["started"] + summary["aced"]
        assert summary["aced"] == 1 and summary["started"] == 0
        assert summary["to_learn"] == total - 1

    def test_silence_scores_zero(self, served):
        client, _ = served
        headers = fresh_user(client, "silent")
        manifest = client.get("/api/lessons/demo").json()
        region = manifest["instrument_regions"][0]
        wav = encode_wav(AudioBuffer(np.zeros(22050), 22050), "int16")
        response = client.post(
            f"/api/lessons/demo/regions/{region['id']}/recordings",
            files={"recording": ("take.wav", wav, "audio/wav")},
            headers=headers,
        )
        assert response.status_code == 200
        body = response.json()
        assert body["report"]["score"] == 0.0
        assert len(body["report"]["missed"]) == len(region["notes"])
        assert body["region_state"] == "started"

    def test_note_free_region_409(self, served, lesson):
        client, _ = served
        headers = fresh_user(client, "notefree")
        # a region over a silent gap has no notes
        gap_start = lesson.truth[0][1] + 0.3
        created = client.post(
            "/api/lessons/demo/regions",
            json={"start": gap_start, "end": gap_start + 1.0, "track": "instrument"},
            headers=headers,
        ).json()["region"]
        assert created["notes"] == []
        wav = encode_wav(AudioBuffer(sine_tone(440, 1.0), 22050), "int16")
        response = client.post(
            f"/api/lessons/demo/regions/{created['id']}/recordings",
            files={"recording": ("take.wav", wav, "audio/wav")},
            headers=headers,
        )
        assert response.status_code == 409

    def test_undecodable_recording_400(self, served):
        client, _ = served
        manifest = client.get("/api/lessons/demo").json()
        rid = manifest["instrument_regions"][0]["id"]
        response = client.post(
            f"/api/lessons/demo/regions/{rid}/recordings",
            files={"recording": ("take.wav", b"not audio", "audio/wav")},
            headers=fresh_user(client, "bad"),
        )
        assert response.status_code == 400

    def test_overlong_recording_413(self, tmp_path):
        config = AppConfig(storage_root=str(tmp_path), max_recording_seconds=2.0)
        mini = make_lesson(seed=11, target_duration=20.0)
        stems_dir = tmp_path / "in"
        stems_dir.mkdir()
        (stems_dir / "v.wav").write_bytes(encode_wav(mini.stems.voice, "float32"))
        (stems_dir / "i.wav").write_bytes(encode_wav(mini.stems.instrument, "float32"))
        preprocess_lesson(
            "cap",
            tmp_path / "lessons" / "cap",
            config,
            voice_path=stems_dir / "v.wav",
            instrument_path=stems_dir / "i.wav",
        )
        app = create_app(config)
        with TestClient(app) as client:
            manifest = client.get("/api/lessons/cap").json()
            rid = manifest["instrument_regions"][0]["id"]
            wav = encode_wav(AudioBuffer(sine_tone(440, 3.0), 22050), "int16")
            response = client.post(
                f"/api/lessons/cap/regions/{rid}/recordings",
                files={"recording": ("take.wav", wav, "audio/wav")},
            )
            assert response.status_code == 413


class TestOverrideAndEvents:
    def test_override_100_aces_region(self, served):
        client, _ = served
        headers = fresh_user(client, "override")
        manifest = client.get("/api/lessons/demo").json()
        rid = manifest["instrument_regions"][0]["id"]
        client.post(
            "/api/lessons/demo/events",
            json={"events": [{"region_id": rid, "kind": "entered"}]},
            headers=headers,
        )
        response = client.post(
            f"/api/lessons/demo/regions/{rid}/score-override",
            json={"score": 100},
            headers=headers,
        )
        assert response.status_code == 200
        body = response.json()
        assert body["report"]["overridden"] is True
        assert body["report"]["manual"] == 100.0
        assert body["region_state"] == "aced"

    def test_out_of_range_override_400(self, served):
        client, _ = served
        manifest = client.get("/api/lessons/demo").json()
        rid = manifest["instrument_regions"][0]["id"]
        response = client.post(
            f"/api/lessons/demo/regions/{rid}/score-override",
            json={"score": 150},
            headers=fresh_user(client, "range"),
        )
        assert response.status_code == 400

    def test_events_count_history(self, served):
        client, _ = served
        headers = fresh_user(client, "looper")
        manifest = client.get("/api/lessons/demo").json()
        rid = manifest["instrument_regions"][0]["id"]
        response = client.post(
            "/api/lessons/demo/events",
            json={"events": [{"region_id": rid, "kind": "looped"}] * 3},
            headers=headers,
        )
        assert response.status_code == 200
        assert response.json()["history"][rid]["looped"] == 3
        assert response.json()["region_states"][rid] == "started"

    def test_stale_revision_409(self, served):
        client, _ = served
        headers = fresh_user(client, "stale")
        manifest = client.get("/api/lessons/demo").json()
        rid = manifest["instrument_regions"][0]["id"]
        current = client.get("/api/lessons/demo/session", headers=headers).json()["revision"]
        ok = client.post(
            "/api/lessons/demo/events",
            json={"events": [{"region_id": rid, "kind": "played"}], "revision": current},
            headers=headers,
        )
        assert ok.status_code == 200
        stale = client.post(
            "/api/lessons/demo/events",
            json={"events": [{"region_id": rid, "kind": "played"}], "revision": current},
            headers=headers,
        )
        assert stale.status_code == 409

    def test_unknown_event_region_404(self, served):
        client, _ = served
        response = client.post(
            "/api/lessons/demo/events",
            json={"events": [{"region_id": "ghost", "kind": "played"}]},
            headers=fresh_user(client, "ghost"),
        )
        assert response.status_code == 404


class TestQueryEndpoint:
    def test_repeated_phrase_matches_at_least_twice(self, served, lesson):
        client, _ = served
        manifest = client.get("/api/lessons/demo").json()
        # the synthetic lesson repeats its first phrase periodically
        rid = manifest["instrument_regions"][0]["id"]
        response = client.post("/api/lessons/demo/regions/query", json={"rid": rid})
        assert response.status_code == 200
        matches = response.json()["region_ids"]
        assert rid in matches
        assert len(matches) >= 2

    def test_explicit_note_query(self, served):
        client, _ = served
        manifest = client.get("/api/lessons/demo").json()
        notes = [n["midi"] for n in manifest["instrument_regions"][0]["notes"]]
        response = client.post("/api/lessons/demo/regions/query", json={"notes": notes})
        assert manifest["instrument_regions"][0]["id"] in response.json()["region_ids"]

    def test_query_without_body_400(self, served):
        client, _ = served
        assert client.post("/api/lessons/demo/regions/query", json={}).status_code == 400


class TestDeterminism:
    def test_same_stems_same_manifest_modulo_identity(self, tmp_path, lesson):
        config = AppConfig(storage_root=str(tmp_path))
        stems_dir = tmp_path / "in"
        stems_dir.mkdir()
        (stems_dir / "v.wav").write_bytes(encode_wav(lesson.stems.voice, "float32"))
        (stems_dir / "i.wav").write_bytes(encode_wav(lesson.stems.instrument, "float32"))
        manifests = []
        for name in ("one", "two"):
            preprocess_lesson(
                name,
                tmp_path / "lessons" / name,
                config,
                voice_path=stems_dir / "v.wav",
                instrument_path=stems_dir / "i.wav",
            )
            data = json.loads((tmp_path / "lessons" / name / "manifest.json").read_text())
            for volatile in ("lesson_id", "created_at", "media_url"):
                data.pop(volatile)
            manifests.append(data)
        assert manifests[0] == manifests[1]
