"""Voice/instrument stem acquisition.

Separation itself is an adapter boundary: stems arrive pre-separated as
files, from a configurable external command-line separator, or from a
passthrough that treats the whole mix as the instrument track.
"""

from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import CANONICAL_RATE, AudioBuffer, decode_wav, resample
from .errors import (
    SeparatorConfigError,
    SeparatorFailedError,
    SeparatorOutputMissingError,
    StemMismatchError,
)

DURATION_TOLERANCE = 0.02  # one analysis window


@dataclass(frozen=True)
class StemPair:
    voice: AudioBuffer
    instrument: AudioBuffer

    def __post_init__(self):
        if abs(self.voice.duration - self.instrument.duration) > DURATION_TOLERANCE + 1e-9:
            raise StemMismatchError(
                f"stem durations differ: voice {self.voice.duration:.3f}s, "
                f"instrument {self.instrument.duration:.3f}s"
            )


def _load_canonical(path: str | Path) -> AudioBuffer:
    data = Path(path).read_bytes()
    return resample(decode_wav(data), CANONICAL_RATE)


def load_stems(voice_path: str | Path, instrument_path: str | Path) -> StemPair:
    """Load pre-separated stems and resample both to the canonical rate."""
    return StemPair(voice=_load_canonical(voice_path), instrument=_load_canonical(instrument_path))


def passthrough_stems(mix: AudioBuffer) -> StemPair:
    """Degraded mode for instrument-only lessons: silent voice, mix as instrument."""
    mix = resample(mix, CANONICAL_RATE)
    silence = AudioBuffer(np.zeros(len(mix.samples)), CANONICAL_RATE)
    return StemPair(voice=silence, instrument=mix)


def run_external_separator(
    mix_path: str | Path,
    command_template: str,
    voice_name: str = "vocals.wav",
    instrument_name: str = "accompaniment.wav",
    workdir: str | Path | None = None,
) -> StemPair:
    """Invoke an external two-stem separator and load its output.

    ``command_template`` must contain ``{input}`` and ``{outdir}``
    placeholders; the command is expected to write ``voice_name`` and
    ``instrument_name`` into the output directory.
    """
    if "{input}" not in command_template or "{outdir}" not in command_template:
        raise SeparatorConfigError(
            "separator command template must contain {input} and {outdir} placeholders"
        )
    workdir = Path(workdir) if workdir is not None else Path(tempfile.mkdtemp(prefix="stems-"))
    workdir.mkdir(parents=True, exist_ok=True)
    command = command_template.format(input=str(mix_path), outdir=str(workdir))
    proc = subprocess.run(command, shell=True, capture_output=True, text=True)
    if proc.returncode != 0:
        raise SeparatorFailedError(
            f"separator exited {proc.returncode}: {proc.stderr.strip() or proc.stdout.strip()}"
        )
    voice_path = workdir / voice_name
    instrument_path = workdir / instrument_name
    missing = [str(p) for p in (voice_path, instrument_path) if not p.exists()]
    if missing:
        raise SeparatorOutputMissingError(f"separator produced no {', '.join(missing)}")
    return load_stems(voice_path, instrument_path)
