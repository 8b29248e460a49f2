"""Application configuration: DSP parameters, storage, and server settings.

Defaults < JSON config file < LESSONLAB_* environment variables.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

ENV_PREFIX = "LESSONLAB_"


@dataclass
class AppConfig:
    # audio / windowing
    sample_rate: int = 22050
    window_seconds: float = 0.02
    # segmentation
    histogram_bins: int = 100
    smoothing_sigma: float = 2.0
    fallback_threshold_ratio: float = 0.05
    gap_threshold_seconds: float = 2.0
    min_region_seconds: float = 1.0
    # pitch tracking
    frame_hop_seconds: float = 0.1
    yin_window: int = 2048
    yin_threshold: float = 0.15
    f_min: float = 60.0
    f_max: float = 1400.0
    min_confidence: float = 0.70
    # scoring / querying
    query_match_threshold: float = 80.0
    # evaluation
    near_miss_window: int = 5
    boundary_granularity_seconds: float = 1.0
    # separation
    separator_command: str | None = None
    separator_voice_name: str = "vocals.wav"
    separator_instrument_name: str = "accompaniment.wav"
    # service
    storage_root: str = "storage"
    host: str = "127.0.0.1"
    port: int = 8765
    max_upload_bytes: int = 200 * 1024 * 1024
    max_recording_seconds: float = 60.0
    static_dir: str | None = None

    def storage_path(self) -> Path:
        return Path(self.storage_root)


def load_config(path: str | Path | None = None, env: dict | None = None) -> AppConfig:
    """Build an AppConfig from defaults, an optional JSON file, and
    LESSONLAB_* environment overrides."""
    values: dict = {}
    if path is not None:
        values.update(json.loads(Path(path).read_text()))
    env = os.environ if env is None else env
    for spec in fields(AppConfig):
        raw = env.get(ENV_PREFIX + spec.name.upper())
        if raw is None:
            continue
        if spec.type in ("int", int):
            values[spec.name] = int(raw)
        elif spec.type in ("float", float):
            values[spec.name] = float(raw)
        elif raw.lower() in ("none", "null", ""):
            values[spec.name] = None
        else:
            values[spec.name] = raw
    known = {spec.name for spec in fields(AppConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return AppConfig(**values)
