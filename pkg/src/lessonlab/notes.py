"""Pitch contours to note sequences.

Rounded MIDI numbers feed scoring; the unrounded per-frame curve is kept
for melody visualization so bends and vibrato stay visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .audio import AudioBuffer
from .errors import WrongTrackError
from .pitch import PitchContour, PitchEstimator, estimate_contour, filter_confident
from .segmentation import Region
from .separation import StemPair

MIDI_MIN = 0
MIDI_MAX = 128

_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]


def freq_to_midi(f: float) -> float:
    """12 * log2(f / 440) + 69; raises on non-positive frequency."""
    if f <= 0:
        raise ValueError("frequency must be positive")
    return 12.0 * math.log2(f / 440.0) + 69.0


def midi_to_freq(midi: float) -> float:
    return 440.0 * 2.0 ** ((midi - 69.0) / 12.0)


def round_half_away(x: float) -> int:
    """Round to nearest integer with halves away from zero."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def midi_to_name(midi: int) -> str:
    """Scientific pitch name, e.g. 69 -> 'A4'."""
    return f"{_NAMES[midi % 12]}{midi // 12 - 1}"


@dataclass(frozen=True)
class Note:
    midi: int
    onset: float
    duration: float
    mean_unrounded_midi: float

    @property
    def name(self) -> str:
        return midi_to_name(self.midi)


@dataclass(frozen=True)
class NoteSequence:
    notes: tuple[Note, ...]
    source: Literal["reference", "user_recording"] = "reference"

    def __len__(self) -> int:
        return len(self.notes)

    def midis(self) -> list[int]:
        return [n.midi for n in self.notes]


@dataclass(frozen=True)
class MelodyCurve:
    times: tuple[float, ...]
    unrounded_midi: tuple[float | None, ...]

    def __post_init__(self):
        if len(self.times) != len(self.unrounded_midi):
            raise ValueError("times and unrounded_midi must be parallel")


def contour_to_notes(
    contour: PitchContour, source: Literal["reference", "user_recording"] = "reference"
) -> tuple[NoteSequence, MelodyCurve]:
    """Aggregate consecutive voiced frames with equal rounded MIDI into notes.

    Unvoiced frames break runs. The curve carries the unrounded values on
    the same frame grid (None where unvoiced).
    """
    hop = contour.frame_seconds
    times = []
    unrounded: list[float | None] = []
    notes = []
    run_midi = None
    run_values: list[float] = []
    run_start = 0.0

    def flush():
        if run_midi is not None:
            notes.append(
                Note(
                    midi=run_midi,
                    onset=run_start,
                    duration=len(run_values) * hop,
                    mean_unrounded_midi=sum(run_values) / len(run_values),
                )
            )

    for frame in contour.frames:
        times.append(frame.time)
        if not frame.voiced:
            unrounded.append(None)
            flush()
            run_midi, run_values = None, []
            continue
        value = freq_to_midi(frame.f0)
        unrounded.append(value)
        midi = min(max(round_half_away(value), MIDI_MIN), MIDI_MAX)
        if midi == run_midi:
            run_values.append(value)
        else:
            flush()
            run_midi, run_values, run_start = midi, [value], frame.time
    flush()

    return (
        NoteSequence(notes=tuple(notes), source=source),
        MelodyCurve(times=tuple(times), unrounded_midi=tuple(unrounded)),
    )


def buffer_to_notes(
    buf: AudioBuffer,
    f_min: float = 60.0,
    f_max: float = 1400.0,
    min_confidence: float = 0.70,
    estimator: PitchEstimator | None = None,
    source: Literal["reference", "user_recording"] = "reference",
) -> tuple[NoteSequence, MelodyCurve]:
    """Full note-detection pipeline: estimate, confidence-filter, aggregate."""
    contour = estimate_contour(buf, f_min=f_min, f_max=f_max, estimator=estimator)
    return contour_to_notes(filter_confident(contour, min_confidence), source=source)


def extract_region_contour(
    stems: StemPair,
    region: Region,
    f_min: float = 60.0,
    f_max: float = 1400.0,
    min_confidence: float = 0.70,
    estimator: PitchEstimator | None = None,
) -> PitchContour:
    """Confidence-filtered pitch contour over an instrument-track region,
    on a region-relative time grid."""
    if region.track != "instrument":
        raise WrongTrackError(f"region {region.id} is on the {region.track} track")
    buf = stems.instrument
    lo = round(region.start * buf.sample_rate)
    hi = round(region.end * buf.sample_rate)
    piece = AudioBuffer(buf.samples[lo:hi], buf.sample_rate)
    contour = estimate_contour(piece, f_min=f_min, f_max=f_max, estimator=estimator)
    return filter_confident(contour, min_confidence)


def extract_region_notes(
    stems: StemPair,
    region: Region,
    f_min: float = 60.0,
    f_max: float = 1400.0,
    min_confidence: float = 0.70,
    estimator: PitchEstimator | None = None,
) -> tuple[NoteSequence, MelodyCurve]:
    """Note detection over an instrument-track region; onsets are region-relative."""
    contour = extract_region_contour(
        stems, region, f_min=f_min, f_max=f_max, min_confidence=min_confidence, estimator=estimator
    )
    return contour_to_notes(contour)
