"""Audio decoding, resampling, normalization, and windowing.

Everything downstream operates on mono ``AudioBuffer`` objects at the
canonical analysis rate of 22050 Hz, where the 0.02 s analysis window is
exactly 441 samples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EmptyInputError, FormatError, UnsupportedFormatError

CANONICAL_RATE = 22050
WINDOW_SECONDS = 0.02

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioBuffer:
    """Immutable mono sample stream.

    ``samples`` is a read-only float64 array with values in [-1, 1];
    ``channel_count`` records the pre-mixdown channel layout.
    """

    samples: np.ndarray
    sample_rate: int
    channel_count: int = 1

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class WindowSpec:
    """Analysis window: a duration and its sample count at a given rate."""

    window_seconds: float
    window_samples: int

    @classmethod
    def for_rate(cls, sample_rate: int, window_seconds: float = WINDOW_SECONDS) -> "WindowSpec":
        return cls(window_seconds, max(1, round(window_seconds * sample_rate)))


class Window(NamedTuple):
    samples: np.ndarray
    partial: bool


def decode_wav(data: bytes) -> AudioBuffer:
    """Decode a linear-PCM RIFF/WAVE byte stream to a mono AudioBuffer.

    Supports 8/16/24/32-bit integer and 32-bit float samples, 1-2
    channels. Multichannel input is mixed to mono by per-frame mean;
    integer samples are scaled by the type's maximum magnitude.
    """
    if len(data) == 0:
        raise EmptyInputError("no input bytes")
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE stream")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise FormatError("fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == _WAVE_FORMAT_EXTENSIBLE:
                if len(body) < 26:
                    raise FormatError("extensible fmt chunk truncated")
                (sub_format,) = struct.unpack_from("<H", body, 24)
                fmt = (sub_format,) + fmt[1:]
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise FormatError("data chunk truncated")
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise FormatError("missing fmt chunk")
    if payload is None:
        raise FormatError("missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format not in (_WAVE_FORMAT_PCM, _WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedFormatError(f"unsupported audio format tag 0x{audio_format:04X}")
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"unsupported channel count {channels}")
    if sample_rate <= 0:
        raise FormatError("invalid sample rate")

    if audio_format == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise UnsupportedFormatError(f"unsupported float width {bits}")
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    elif bits == 8:
        raw = np.frombuffer(payload, dtype=np.uint8)
        samples = (raw.astype(np.float64) - 128.0) / 128.0
    elif bits == 16:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif bits == 24:
        usable = len(payload) - len(payload) % 3
        as_bytes = np.frombuffer(payload[:usable], dtype=np.uint8).reshape(-1, 3)
        ints = (
            as_bytes[:, 0].astype(np.int32)
            | (as_bytes[:, 1].astype(np.int32) << 8)
            | (as_bytes[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        samples = ints.astype(np.float64) / float(1 << 23)
    elif bits == 32:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 4], dtype="<i4")
        samples = raw.astype(np.float64) / float(1 << 31)
    else:
        raise UnsupportedFormatError(f"unsupported sample width {bits}")

    if channels == 2:
        samples = samples[: len(samples) - len(samples) % 2].reshape(-1, 2).mean(axis=1)
    if len(samples) == 0:
        raise EmptyInputError("data chunk holds no samples")

    samples = np.clip(samples, -1.0, 1.0)
    return AudioBuffer(samples=samples, sample_rate=int(sample_rate), channel_count=channels)


def encode_wav(buf: AudioBuffer, sample_format: str = "int16") -> bytes:
    """Encode a mono AudioBuffer as a WAV byte stream.

    ``sample_format`` is ``int16`` (PCM) or ``float32`` (IEEE float).
    """
    if sample_format == "int16":
        fmt_tag, bits = _WAVE_FORMAT_PCM, 16
        scaled = np.round(np.clip(buf.samples, -1.0, 1.0) * 32768.0)
        payload = np.clip(scaled, -32768, 32767).astype("<i2").tobytes()
    elif sample_format == "float32":
        fmt_tag, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
        payload = buf.samples.astype("<f4").tobytes()
    else:
        raise ValueError(f"unknown sample format {sample_format!r}")

    byte_rate = buf.sample_rate * bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        fmt_tag,
        1,
        buf.sample_rate,
        byte_rate,
        bits // 8,
        bits,
        b"data",
        len(payload),
    )
    return header + payload


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Linear-interpolation resampling to ``target_rate``."""
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == buf.sample_rate:
        return buf
    n_in = len(buf.samples)
    n_out = round(n_in * target_rate / buf.sample_rate)
    if n_in == 0 or n_out == 0:
        return AudioBuffer(np.zeros(0), target_rate, buf.channel_count)
    positions = np.arange(n_out) * (buf.sample_rate / target_rate)
    samples = np.interp(positions, np.arange(n_in), buf.samples)
    return AudioBuffer(samples, target_rate, buf.channel_count)


def normalize_peak(buf: AudioBuffer) -> AudioBuffer:
    """Scale so the peak magnitude is 1.0; all-zero input is returned unchanged."""
    if len(buf.samples) == 0:
        return buf
    peak = float(np.max(np.abs(buf.samples)))
    if peak == 0.0 or peak == 1.0:
        return buf
    return AudioBuffer(buf.samples / peak, buf.sample_rate, buf.channel_count)


def windows(buf: AudioBuffer, spec: WindowSpec) -> list[Window]:
    """Split into non-overlapping windows; a short trailing window is kept
    and flagged partial. Concatenating all windows reproduces the buffer."""
    if spec.window_samples < 1:
        raise ValueError("window_samples must be >= 1")
    out = []
    n = len(buf.samples)
    for start in range(0, n, spec.window_samples):
        chunk = buf.samples[start : start + spec.window_samples]
        out.append(Window(chunk, partial=len(chunk) < spec.window_samples))
    return out
