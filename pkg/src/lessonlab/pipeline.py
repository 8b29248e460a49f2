"""Preprocessing pipeline: audio in, lesson directory out.

Shared by the CLI and the service's background jobs. A lesson directory
holds manifest.json, the resampled stems, and a playable media file.
"""

from __future__ import annotations

import datetime
import shutil
from dataclasses import asdict
from pathlib import Path
from typing import Callable

import numpy as np

from .audio import AudioBuffer, WindowSpec, decode_wav, encode_wav, resample
from .config import AppConfig
from .errors import LessonlabError
from .manifest import LessonManifest, RegionData, contour_to_json, waveform_peaks
from .notes import contour_to_notes, extract_region_contour
from .pitch import YinEstimator
from .segmentation import Region, segment_lesson
from .separation import StemPair, load_stems, passthrough_stems, run_external_separator

ProgressFn = Callable[[float, str], None]


def estimator_from_config(config: AppConfig) -> YinEstimator:
    return YinEstimator(
        window_size=config.yin_window,
        threshold=config.yin_threshold,
        frame_seconds=config.frame_hop_seconds,
    )


def extract_region_data(stems: StemPair, region: Region, config: AppConfig) -> RegionData:
    """Notes, melody curve, and serialized contour for an instrument region."""
    contour = extract_region_contour(
        stems,
        region,
        f_min=config.f_min,
        f_max=config.f_max,
        min_confidence=config.min_confidence,
        estimator=estimator_from_config(config),
    )
    sequence, curve = contour_to_notes(contour)
    return RegionData(region=region, notes=sequence, curve=curve, contour=contour_to_json(contour))


def acquire_stems(
    config: AppConfig,
    mix_path: str | Path | None = None,
    voice_path: str | Path | None = None,
    instrument_path: str | Path | None = None,
    workdir: str | Path | None = None,
) -> StemPair:
    """Resolve stems from explicit files, the configured separator, or passthrough."""
    if voice_path is not None and instrument_path is not None:
        return load_stems(voice_path, instrument_path)
    if mix_path is None:
        raise LessonlabError("need either a mix or a voice/instrument stem pair")
    if config.separator_command:
        return run_external_separator(
            mix_path,
            config.separator_command,
            voice_name=config.separator_voice_name,
            instrument_name=config.separator_instrument_name,
            workdir=workdir,
        )
    mix = resample(decode_wav(Path(mix_path).read_bytes()), config.sample_rate)
    return passthrough_stems(mix)


def preprocess_lesson(
    lesson_id: str,
    out_dir: str | Path,
    config: AppConfig,
    mix_path: str | Path | None = None,
    voice_path: str | Path | None = None,
    instrument_path: str | Path | None = None,
    media_path: str | Path | None = None,
    progress: ProgressFn | None = None,
) -> LessonManifest:
    """Run separation, segmentation, and note extraction; write the lesson dir."""

    def report(fraction: float, stage: str) -> None:
        if progress:
            progress(fraction, stage)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report(0.05, "decoding")
    stems = acquire_stems(
        config,
        mix_path=mix_path,
        voice_path=voice_path,
        instrument_path=instrument_path,
        workdir=out_dir / "separated",
    )

    report(0.25, "segmenting")
    seg = segment_lesson(
        stems,
        window_seconds=config.window_seconds,
        gap_threshold=config.gap_threshold_seconds,
        min_duration=config.min_region_seconds,
        bins=config.histogram_bins,
        smoothing_sigma=config.smoothing_sigma,
        fallback_ratio=config.fallback_threshold_ratio,
    )

    report(0.4, "extracting notes")
    instrument_regions = []
    for index, region in enumerate(seg.instrument_regions):
        instrument_regions.append(extract_region_data(stems, region, config))
        report(0.4 + 0.5 * (index + 1) / max(len(seg.instrument_regions), 1), "extracting notes")

    report(0.92, "writing lesson")
    stems_dir = out_dir / "stems"
    stems_dir.mkdir(exist_ok=True)
    (stems_dir / "voice.wav").write_bytes(encode_wav(stems.voice, "float32"))
    (stems_dir / "instrument.wav").write_bytes(encode_wav(stems.instrument, "float32"))

    if media_path is not None:
        media_name = "media" + Path(media_path).suffix
        shutil.copyfile(media_path, out_dir / media_name)
    else:
        mixed = np.clip(stems.voice.samples + stems.instrument.samples, -1.0, 1.0)
        media_name = "media.wav"
        (out_dir / media_name).write_bytes(
            encode_wav(AudioBuffer(mixed, stems.instrument.sample_rate), "int16")
        )

    spec = WindowSpec.for_rate(config.sample_rate, config.window_seconds)
    manifest = LessonManifest(
        lesson_id=lesson_id,
        duration=stems.instrument.duration,
        media_url=f"/api/lessons/{lesson_id}/media",
        voice_regions=[RegionData(region=r) for r in seg.voice_regions],
        instrument_regions=instrument_regions,
        waveform_peaks={
            "voice": waveform_peaks(stems.voice, spec),
            "instrument": waveform_peaks(stems.instrument, spec),
        },
        preprocessing_config=_dsp_config(config),
        thresholds={"voice": seg.voice_threshold, "instrument": seg.instrument_threshold},
        threshold_fallback=seg.threshold_fallback,
        sample_rate=config.sample_rate,
        created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )
    (out_dir / "manifest.json").write_bytes(manifest.to_bytes())
    report(1.0, "done")
    return manifest


def _dsp_config(config: AppConfig) -> dict:
    keys = (
        "sample_rate",
        "window_seconds",
        "histogram_bins",
        "smoothing_sigma",
        "fallback_threshold_ratio",
        "gap_threshold_seconds",
        "min_region_seconds",
        "frame_hop_seconds",
        "yin_window",
        "yin_threshold",
        "f_min",
        "f_max",
        "min_confidence",
    )
    everything = asdict(config)
    return {k: everything[k] for k in keys}


def load_lesson_stems(lesson_dir: str | Path) -> StemPair:
    lesson_dir = Path(lesson_dir)
    return load_stems(lesson_dir / "stems" / "voice.wav", lesson_dir / "stems" / "instrument.wav")
