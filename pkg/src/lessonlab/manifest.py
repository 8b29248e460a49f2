"""Lesson manifest: the serialized product of preprocessing.

The manifest carries everything the client needs to render a lesson:
regions per track (with note sequences and melody curves on instrument
regions), per-stem waveform peaks, and the parameter set used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioBuffer, WindowSpec
from .notes import MelodyCurve, Note, NoteSequence
from .pitch import PitchContour
from .segmentation import Region

SCHEMA_VERSION = 1


def contour_to_json(contour: PitchContour) -> dict:
    """Parallel arrays (times, f0 with nulls when unvoiced, confidence)."""
    return {
        "hop": contour.frame_seconds,
        "times": [round(f.time, 4) for f in contour.frames],
        "f0": [None if f.f0 is None else round(f.f0, 4) for f in contour.frames],
        "confidence": [round(f.confidence, 4) for f in contour.frames],
    }


@dataclass
class RegionData:
    """A region plus its extracted musical content (instrument track only)."""

    region: Region
    notes: NoteSequence | None = None
    curve: MelodyCurve | None = None
    contour: dict | None = None  # serialized form, see contour_to_json

    def to_json(self) -> dict:
        data = {
            "id": self.region.id,
            "start": round(self.region.start, 3),
            "end": round(self.region.end, 3),
            "track": self.region.track,
            "source": self.region.source,
            "state": self.region.state,
        }
        if self.notes is not None:
            data["notes"] = [
                {
                    "midi": n.midi,
                    "onset": round(n.onset, 3),
                    "duration": round(n.duration, 3),
                    "mean_unrounded_midi": round(n.mean_unrounded_midi, 4),
                }
                for n in self.notes.notes
            ]
        if self.curve is not None:
            data["curve"] = {
                "times": [round(t, 4) for t in self.curve.times],
                "midi": [
                    None if v is None else round(v, 4) for v in self.curve.unrounded_midi
                ],
            }
        if self.contour is not None:
            data["contour"] = self.contour
        return data

    @classmethod
    def from_json(cls, data: dict) -> "RegionData":
        region = Region(
            id=data["id"],
            start=data["start"],
            end=data["end"],
            track=data["track"],
            source=data.get("source", "auto"),
            state=data.get("state", "to_learn"),
        )
        notes = None
        if "notes" in data:
            notes = NoteSequence(
                notes=tuple(
                    Note(
                        midi=n["midi"],
                        onset=n["onset"],
                        duration=n["duration"],
                        mean_unrounded_midi=n.get("mean_unrounded_midi", float(n["midi"])),
                    )
                    for n in data["notes"]
                )
            )
        curve = None
        if "curve" in data:
            curve = MelodyCurve(
                times=tuple(data["curve"]["times"]),
                unrounded_midi=tuple(data["curve"]["midi"]),
            )
        return cls(region=region, notes=notes, curve=curve, contour=data.get("contour"))


def waveform_peaks(buf: AudioBuffer, spec: WindowSpec) -> list[list[float]]:
    """Per-window [min, max] envelope for client-side waveform rendering."""
    samples = buf.samples
    w = spec.window_samples
    peaks = []
    n_full = len(samples) // w
    if n_full:
        full = samples[: n_full * w].reshape(n_full, w)
        mins = full.min(axis=1)
        maxs = full.max(axis=1)
        peaks = [[round(float(a), 4), round(float(b), 4)] for a, b in zip(mins, maxs)]
    tail = samples[n_full * w :]
    if len(tail):
        peaks.append([round(float(tail.min()), 4), round(float(tail.max()), 4)])
    return peaks


@dataclass
class LessonManifest:
    lesson_id: str
    duration: float
    media_url: str | None
    voice_regions: list[RegionData] = field(default_factory=list)
    instrument_regions: list[RegionData] = field(default_factory=list)
    waveform_peaks: dict[str, list[list[float]]] = field(default_factory=dict)
    preprocessing_config: dict = field(default_factory=dict)
    thresholds: dict[str, float] = field(default_factory=dict)
    threshold_fallback: dict[str, bool] = field(default_factory=dict)
    sample_rate: int = 22050
    created_at: str = ""

    def all_regions(self) -> list[RegionData]:
        return sorted(self.voice_regions + self.instrument_regions, key=lambda rd: rd.region.start)

    def region_ids(self) -> list[str]:
        return [rd.region.id for rd in self.all_regions()]

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "lesson_id": self.lesson_id,
            "created_at": self.created_at,
            "duration": round(self.duration, 3),
            "sample_rate": self.sample_rate,
            "media_url": self.media_url,
            "preprocessing_config": self.preprocessing_config,
            "thresholds": {k: round(v, 6) for k, v in self.thresholds.items()},
            "threshold_fallback": self.threshold_fallback,
            "voice_regions": [rd.to_json() for rd in self.voice_regions],
            "instrument_regions": [rd.to_json() for rd in self.instrument_regions],
            "waveform_peaks": self.waveform_peaks,
        }

    def to_bytes(self) -> bytes:
        return (json.dumps(self.to_json(), indent=1) + "\n").encode()

    @classmethod
    def from_json(cls, data: dict) -> "LessonManifest":
        return cls(
            lesson_id=data["lesson_id"],
            duration=data["duration"],
            media_url=data.get("media_url"),
            voice_regions=[RegionData.from_json(r) for r in data.get("voice_regions", [])],
            instrument_regions=[RegionData.from_json(r) for r in data.get("instrument_regions", [])],
            waveform_peaks=data.get("waveform_peaks", {}),
            preprocessing_config=data.get("preprocessing_config", {}),
            thresholds=data.get("thresholds", {}),
            threshold_fallback=data.get("threshold_fallback", {}),
            sample_rate=data.get("sample_rate", 22050),
            created_at=data.get("created_at", ""),
        )
