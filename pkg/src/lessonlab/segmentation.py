"""Silence labeling and region grouping over per-window RMS energy.

Each stem is processed independently: peak-normalize, compute per-window
RMS, pick a per-stem threshold from the RMS histogram, label windows,
then group non-silent runs into regions with gap merging and a minimum
duration filter.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .audio import AudioBuffer, WindowSpec, normalize_peak
from .errors import DegenerateProfileError
from .separation import StemPair

Track = Literal["voice", "instrument"]
RegionState = Literal["to_learn", "started", "aced"]

DEFAULT_GAP_SECONDS = 2.0
DEFAULT_MIN_DURATION = 1.0
DEFAULT_HISTOGRAM_BINS = 100
DEFAULT_SMOOTHING_SIGMA = 2.0
FALLBACK_THRESHOLD_RATIO = 0.05


@dataclass(frozen=True)
class EnergyProfile:
    rms: np.ndarray
    window_seconds: float

    def __post_init__(self):
        rms = np.ascontiguousarray(self.rms, dtype=np.float64)
        rms.setflags(write=False)
        object.__setattr__(self, "rms", rms)

    def __len__(self) -> int:
        return len(self.rms)


@dataclass(frozen=True)
class SilenceLabels:
    labels: np.ndarray  # True = non-silent
    threshold: float

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=bool)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)


@dataclass
class Region:
    """A time interval on the lesson timeline treated as a practice unit."""

    id: str
    start: float
    end: float
    track: Track
    source: Literal["auto", "user"] = "auto"
    state: RegionState = "to_learn"

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid region bounds [{self.start}, {self.end}]")

    @property
    def duration(self) -> float:
        return self.end - self.start


def compute_rms(buf: AudioBuffer, spec: WindowSpec) -> EnergyProfile:
    """Per-window RMS; the partial trailing window uses its own length."""
    samples = buf.samples
    w = spec.window_samples
    n_full = len(samples) // w
    rms = np.zeros(0)
    if n_full:
        full = samples[: n_full * w].reshape(n_full, w)
        rms = np.sqrt(np.mean(full * full, axis=1))
    tail = samples[n_full * w :]
    if len(tail):
        rms = np.append(rms, np.sqrt(np.mean(tail * tail)))
    return EnergyProfile(rms=rms, window_seconds=spec.window_seconds)


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(4 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2 * sigma * sigma))
    return kernel / kernel.sum()


def adaptive_threshold(
    profile: EnergyProfile,
    bins: int = DEFAULT_HISTOGRAM_BINS,
    smoothing_sigma: float = DEFAULT_SMOOTHING_SIGMA,
) -> float:
    """Pick a silence threshold from the smoothed RMS histogram.

    Builds an equal-width histogram of RMS values over [0, max], smooths
    the counts with a discrete Gaussian (truncated at 4 sigma,
    renormalized), and returns the center of the first interior bin
    after the histogram's first peak where the smoothed counts stop
    falling -- the valley that separates the low-RMS silence mode from
    the signal mass above it. If the counts never flatten, the lowest
    interior bin wins (first bin on ties). Raises
    ``DegenerateProfileError`` when the profile has no spread, in which
    case no valley exists and callers fall back to a fixed threshold.
    """
    if len(profile) == 0:
        raise ValueError("profile is empty")
    if bins < 8:
        raise ValueError("bins must be >= 8")
    rms = profile.rms
    top = float(rms.max())
    if top == float(rms.min()):
        raise DegenerateProfileError("all RMS values identical")
    counts, edges = np.histogram(rms, bins=bins, range=(0.0, top))
    smoothed = np.convolve(counts.astype(np.float64), _gaussian_kernel(smoothing_sigma), mode="same")

    peak = 0
    while peak < bins - 1 and smoothed[peak] < smoothed[peak + 1]:
        peak += 1
    valley = None
    for i in range(peak + 1, bins - 1):
        if smoothed[i] <= smoothed[i + 1]:
            valley = i
            break
    if valley is None:
        valley = 1 + int(np.argmin(smoothed[1 : bins - 1]))
    valley = min(max(valley, 1), bins - 2)
    return float((edges[valley] + edges[valley + 1]) / 2.0)


def fallback_threshold(profile: EnergyProfile, ratio: float = FALLBACK_THRESHOLD_RATIO) -> float:
    return ratio * float(profile.rms.max()) if len(profile) else 0.0


def label_silence(profile: EnergyProfile, threshold: float) -> SilenceLabels:
    """Non-silent when RMS >= threshold."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    return SilenceLabels(labels=profile.rms >= threshold, threshold=threshold)


def group_regions(
    labels: SilenceLabels,
    window_seconds: float,
    gap_threshold: float = DEFAULT_GAP_SECONDS,
    min_duration: float = DEFAULT_MIN_DURATION,
    track: Track = "instrument",
) -> list[Region]:
    """Group non-silent windows into regions.

    Maximal non-silent runs are merged when the silent gap between them
    is <= gap_threshold (strictly longer gaps split); merged regions
    shorter than min_duration are dropped. Gap and duration comparisons
    happen in whole windows so that thresholds that are exact multiples
    of the window length behave exactly.
    """
    if gap_threshold <= 0:
        raise ValueError("gap_threshold must be positive")
    if min_duration < 0:
        raise ValueError("min_duration must be >= 0")

    flags = labels.labels
    runs: list[list[int]] = []  # [first_window, last_window] inclusive
    start = None
    for i, on in enumerate(flags):
        if on and start is None:
            start = i
        elif not on and start is not None:
            runs.append([start, i - 1])
            start = None
    if start is not None:
        runs.append([start, len(flags) - 1])

    max_gap_windows = int(np.floor(gap_threshold / window_seconds + 1e-9))
    min_windows = int(np.ceil(min_duration / window_seconds - 1e-9))

    merged: list[list[int]] = []
    for run in runs:
        if merged and run[0] - (merged[-1][1] + 1) <= max_gap_windows:
            merged[-1][1] = run[1]
        else:
            merged.append(run)

    regions = []
    for first, last in merged:
        if last - first + 1 < min_windows:
            continue
        regions.append(
            Region(
                id=f"{track}-{len(regions):03d}",
                start=first * window_seconds,
                end=(last + 1) * window_seconds,
                track=track,
            )
        )
    return regions


@dataclass
class SegmentationResult:
    voice_regions: list[Region]
    instrument_regions: list[Region]
    voice_profile: EnergyProfile
    instrument_profile: EnergyProfile
    voice_threshold: float = 0.0
    instrument_threshold: float = 0.0
    threshold_fallback: dict = field(default_factory=dict)


def _segment_stem(
    buf: AudioBuffer,
    track: Track,
    window_seconds: float,
    gap_threshold: float,
    min_duration: float,
    bins: int,
    smoothing_sigma: float,
    fallback_ratio: float,
) -> tuple[list[Region], EnergyProfile, float, bool]:
    spec = WindowSpec.for_rate(buf.sample_rate, window_seconds)
    profile = compute_rms(normalize_peak(buf), spec)
    if len(profile) == 0:
        return [], profile, 0.0, False
    try:
        threshold = adaptive_threshold(profile, bins=bins, smoothing_sigma=smoothing_sigma)
        fallback = False
    except DegenerateProfileError:
        threshold = fallback_threshold(profile, fallback_ratio)
        fallback = True
        if float(profile.rms.max()) == 0.0:
            # Truly silent stem: nothing can be non-silent.
            return [], profile, threshold, True
    labels = label_silence(profile, threshold)
    regions = group_regions(
        labels,
        window_seconds,
        gap_threshold=gap_threshold,
        min_duration=min_duration,
        track=track,
    )
    return regions, profile, threshold, fallback


def segment_lesson(
    stems: StemPair,
    window_seconds: float = 0.02,
    gap_threshold: float = DEFAULT_GAP_SECONDS,
    min_duration: float = DEFAULT_MIN_DURATION,
    bins: int = DEFAULT_HISTOGRAM_BINS,
    smoothing_sigma: float = DEFAULT_SMOOTHING_SIGMA,
    fallback_ratio: float = FALLBACK_THRESHOLD_RATIO,
) -> SegmentationResult:
    """Run the full segmentation pipeline independently on both stems."""
    results = {}
    for track, buf in (("voice", stems.voice), ("instrument", stems.instrument)):
        results[track] = _segment_stem(
            buf, track, window_seconds, gap_threshold, min_duration, bins, smoothing_sigma, fallback_ratio
        )
    return SegmentationResult(
        voice_regions=results["voice"][0],
        instrument_regions=results["instrument"][0],
        voice_profile=results["voice"][1],
        instrument_profile=results["instrument"][1],
        voice_threshold=results["voice"][2],
        instrument_threshold=results["instrument"][2],
        threshold_fallback={
            "voice": results["voice"][3],
            "instrument": results["instrument"][3],
        },
    )


def clone_region(region: Region, **changes) -> Region:
    return replace(region, **changes)
