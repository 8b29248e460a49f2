"""Synthetic lesson generation.

Builds stem pairs with known ground truth: tone phrases on the
instrument stem (separated by silence gaps longer than the region merge
threshold) and speech-band noise bursts on the voice stem. Used by the
test corpus, the evaluation harness, and demos.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import CANONICAL_RATE, AudioBuffer, encode_wav
from .notes import midi_to_freq
from .separation import StemPair

NOISE_FLOOR = 1.5e-3


def sine_tone(
    freq: float,
    duration: float,
    sample_rate: int = CANONICAL_RATE,
    amplitude: float = 0.5,
    fade: float = 0.01,
) -> np.ndarray:
    n = round(duration * sample_rate)
    t = np.arange(n) / sample_rate
    wave = amplitude * np.sin(2 * np.pi * freq * t)
    edge = min(round(fade * sample_rate), n // 2)
    if edge:
        ramp = np.linspace(0.0, 1.0, edge)
        wave[:edge] *= ramp
        wave[-edge:] *= ramp[::-1]
    return wave


def speech_noise(
    duration: float,
    sample_rate: int = CANONICAL_RATE,
    amplitude: float = 0.3,
    low_hz: float = 120.0,
    high_hz: float = 2400.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Band-limited noise standing in for narration."""
    rng = rng or np.random.default_rng(0)
    n = round(duration * sample_rate)
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, 1 / sample_rate)
    spectrum[(freqs < low_hz) | (freqs > high_hz)] = 0
    shaped = np.fft.irfft(spectrum, n)
    peak = np.max(np.abs(shaped)) or 1.0
    wave = shaped / peak * amplitude
    edge = min(round(0.02 * sample_rate), n // 2)
    if edge:
        ramp = np.linspace(0.0, 1.0, edge)
        wave[:edge] *= ramp
        wave[-edge:] *= ramp[::-1]
    return wave


@dataclass
class SyntheticLesson:
    stems: StemPair
    truth: list[tuple[float, float]]  # instrument phrase intervals
    phrase_midis: list[list[int]] = field(default_factory=list)
    voice_truth: list[tuple[float, float]] = field(default_factory=list)

    @property
    def duration(self) -> float:
        return self.stems.instrument.duration


def make_lesson(
    seed: int,
    target_duration: float = 120.0,
    sample_rate: int = CANONICAL_RATE,
    scale: tuple[int, ...] = (52, 55, 57, 59, 62, 64, 67, 69, 71, 74),
    repeat_phrase_every: int | None = None,
) -> SyntheticLesson:
    """Alternate narration and instrument phrases with known boundaries.

    Gaps between phrases exceed the 2 s merge threshold so each phrase
    is recoverable as one region; every phrase is at least 1.2 s long so
    none is dropped by the minimum-duration filter. ``repeat_phrase_every``
    reuses the first phrase's notes periodically (for query tests).
    """
    rng = np.random.default_rng(seed)
    n_total = round(target_duration * sample_rate)
    instrument = rng.standard_normal(n_total) * NOISE_FLOOR
    voice = rng.standard_normal(n_total) * NOISE_FLOOR

    truth: list[tuple[float, float]] = []
    voice_truth: list[tuple[float, float]] = []
    phrase_midis: list[list[int]] = []
    t = float(rng.uniform(1.0, 2.5))
    first_phrase: list[tuple[int, float, float]] | None = None
    while True:
        if repeat_phrase_every and first_phrase and len(truth) % repeat_phrase_every == 0:
            phrase = list(first_phrase)  # exact repeat, queryable later
        else:
            midis = [int(rng.choice(scale)) for _ in range(int(rng.integers(3, 6)))]
            durations = rng.uniform(0.45, 0.9, size=len(midis))
            phrase = [
                (midi, float(dur), float(rng.uniform(0.45, 0.75)))
                for midi, dur in zip(midis, durations)
            ]
        phrase_len = sum(dur for _, dur, _ in phrase)
        if t + phrase_len > target_duration - 0.5:
            break
        start = t
        for midi, dur, amp in phrase:
            wave = sine_tone(midi_to_freq(midi), dur, sample_rate, amplitude=amp)
            lo = round(t * sample_rate)
            instrument[lo : lo + len(wave)] += wave
            t += dur
        truth.append((start, t))
        phrase_midis.append([midi for midi, _, _ in phrase])
        if first_phrase is None:
            first_phrase = phrase

        gap = float(rng.uniform(2.6, 4.5))
        if gap > 2.2:
            burst = speech_noise(
                gap - 1.2, sample_rate, amplitude=float(rng.uniform(0.25, 0.5)), rng=rng
            )
            lo = round((t + 0.6) * sample_rate)
            hi = min(lo + len(burst), n_total)
            voice[lo:hi] += burst[: hi - lo]
            voice_truth.append((t + 0.6, t + 0.6 + (hi - lo) / sample_rate))
        t += gap

    np.clip(instrument, -1.0, 1.0, out=instrument)
    np.clip(voice, -1.0, 1.0, out=voice)
    stems = StemPair(
        voice=AudioBuffer(voice, sample_rate),
        instrument=AudioBuffer(instrument, sample_rate),
    )
    return SyntheticLesson(
        stems=stems, truth=truth, phrase_midis=phrase_midis, voice_truth=voice_truth
    )


def write_lesson(directory: str | Path, lesson: SyntheticLesson) -> Path:
    """Write voice.wav, instrument.wav, and truth.json as a corpus entry."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "voice.wav").write_bytes(encode_wav(lesson.stems.voice, "float32"))
    (directory / "instrument.wav").write_bytes(encode_wav(lesson.stems.instrument, "float32"))
    (directory / "truth.json").write_text(
        json.dumps([{"start": round(s, 3), "end": round(e, 3)} for s, e in lesson.truth])
    )
    return directory


def write_corpus(directory: str | Path, count: int = 10, seed: int = 0, **kwargs) -> Path:
    directory = Path(directory)
    for i in range(count):
        write_lesson(directory / f"lesson-{i:02d}", make_lesson(seed + i, **kwargs))
    return directory
