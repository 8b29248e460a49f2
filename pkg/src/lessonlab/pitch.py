"""Monophonic fundamental-frequency tracking.

The estimator interface is a callable producing a ``PitchContour`` on a
0.1 s frame grid; the shipped implementation is an autocorrelation-based
tracker in the YIN family (cumulative-mean-normalized difference
function with an absolute dip threshold and parabolic lag refinement).
A neural tracker can be substituted behind the same interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .audio import AudioBuffer

FRAME_SECONDS = 0.1
DEFAULT_F_MIN = 60.0
DEFAULT_F_MAX = 1400.0
YIN_WINDOW = 2048
YIN_THRESHOLD = 0.15
SILENCE_RMS = 1e-4


@dataclass(frozen=True)
class PitchFrame:
    time: float
    f0: float | None
    confidence: float

    @property
    def voiced(self) -> bool:
        return self.f0 is not None


@dataclass(frozen=True)
class PitchContour:
    frames: tuple[PitchFrame, ...]
    frame_seconds: float = FRAME_SECONDS

    def __len__(self) -> int:
        return len(self.frames)

    def voiced_frames(self) -> list[PitchFrame]:
        return [f for f in self.frames if f.voiced]


class PitchEstimator(Protocol):
    def __call__(self, buf: AudioBuffer, f_min: float, f_max: float) -> PitchContour: ...


def _cmnd(window: np.ndarray, lag_max: int) -> np.ndarray:
    """Cumulative-mean-normalized difference function for lags 0..lag_max.

    The raw difference d(tau) = sum_j (x_j - x_{j+tau})^2 over the
    shrinking overlap is computed from prefix energies and an
    FFT-based linear autocorrelation.
    """
    n = len(window)
    spectrum = np.fft.rfft(window, 2 * n)
    acf = np.fft.irfft(spectrum * np.conj(spectrum))[: lag_max + 1]
    prefix = np.concatenate(([0.0], np.cumsum(window * window)))
    taus = np.arange(lag_max + 1)
    d = prefix[n - taus] + (prefix[n] - prefix[taus]) - 2.0 * acf
    d = np.maximum(d, 0.0)

    out = np.ones(lag_max + 1)
    running = np.cumsum(d[1:])
    nonzero = running > 0
    out[1:][nonzero] = d[1:][nonzero] * taus[1:][nonzero] / running[nonzero]
    return out


def _parabolic_offset(y1: float, y2: float, y3: float) -> float:
    denom = y1 - 2.0 * y2 + y3
    if denom == 0.0:
        return 0.0
    offset = 0.5 * (y1 - y3) / denom
    return offset if abs(offset) <= 1.0 else 0.0


@dataclass(frozen=True)
class YinEstimator:
    window_size: int = YIN_WINDOW
    threshold: float = YIN_THRESHOLD
    frame_seconds: float = FRAME_SECONDS
    silence_rms: float = SILENCE_RMS

    def __call__(self, buf: AudioBuffer, f_min: float = DEFAULT_F_MIN, f_max: float = DEFAULT_F_MAX) -> PitchContour:
        if not (0 < f_min < f_max < buf.sample_rate / 2):
            raise ValueError("need 0 < f_min < f_max < sample_rate/2")
        sr = buf.sample_rate
        samples = buf.samples
        half = self.window_size // 2
        lag_min = max(2, int(np.ceil(sr / f_max)))
        lag_max = min(int(np.floor(sr / f_min)), self.window_size - 2)
        if lag_max <= lag_min:
            raise ValueError("search range too narrow for the analysis window")

        n_frames = int(np.ceil(buf.duration / self.frame_seconds - 1e-9))
        frames = []
        for k in range(n_frames):
            # frame k covers [k*hop, (k+1)*hop); analyze around its center
            time = (k + 0.5) * self.frame_seconds
            center = round(time * sr)
            window = np.zeros(self.window_size)
            lo = max(0, center - half)
            hi = min(len(samples), center + half)
            window[lo - (center - half) : lo - (center - half) + (hi - lo)] = samples[lo:hi]

            if np.sqrt(np.mean(window * window)) < self.silence_rms:
                frames.append(PitchFrame(time=time, f0=None, confidence=0.0))
                continue

            cmnd = _cmnd(window, lag_max)
            search = cmnd[lag_min : lag_max + 1]
            below = np.flatnonzero(search < self.threshold)
            if len(below):
                tau = lag_min + int(below[0])
                # walk down to the local minimum of the dip before refining
                while tau + 1 <= lag_max and cmnd[tau + 1] < cmnd[tau]:
                    tau += 1
            else:
                tau = lag_min + int(np.argmin(search))

            refined = float(tau)
            if lag_min < tau < lag_max:
                refined += _parabolic_offset(cmnd[tau - 1], cmnd[tau], cmnd[tau + 1])
            f0 = min(max(sr / refined, f_min), f_max)
            confidence = min(max(1.0 - float(cmnd[tau]), 0.0), 1.0)
            frames.append(PitchFrame(time=time, f0=f0, confidence=confidence))

        return PitchContour(frames=tuple(frames), frame_seconds=self.frame_seconds)


def estimate_contour(
    buf: AudioBuffer,
    f_min: float = DEFAULT_F_MIN,
    f_max: float = DEFAULT_F_MAX,
    estimator: PitchEstimator | None = None,
) -> PitchContour:
    """Estimate per-frame f0 and confidence with the configured estimator."""
    if estimator is None:
        estimator = YinEstimator()
    return estimator(buf, f_min, f_max)


def filter_confident(contour: PitchContour, min_confidence: float = 0.70) -> PitchContour:
    """Unvoice frames below the confidence floor; the time grid is preserved.

    A frame exactly at the floor is kept (only strictly lower confidence
    is removed).
    """
    if not 0 <= min_confidence <= 1:
        raise ValueError("min_confidence must lie in [0, 1]")
    frames = tuple(
        PitchFrame(time=f.time, f0=None, confidence=f.confidence)
        if f.voiced and f.confidence < min_confidence
        else f
        for f in contour.frames
    )
    return PitchContour(frames=frames, frame_seconds=contour.frame_seconds)
