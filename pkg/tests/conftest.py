import struct

import numpy as np
import pytest

from lessonlab.audio import AudioBuffer
from lessonlab.synth import make_lesson


def pcm16_wav(samples: bytes, channels: int = 1, rate: int = 44100, bits: int = 16, tag: int = 1) -> bytes:
    """Hand-packed RIFF/WAVE bytes, independent of the package encoder."""
    byte_rate = rate * channels * bits // 8
    block_align = channels * bits // 8
    return (
        b"RIFF"
        + struct.pack("<I", 36 + len(samples))
        + b"WAVE"
        + b"fmt "
        + struct.pack("<IHHIIHH", 16, tag, channels, rate, byte_rate, block_align, bits)
        + b"data"
        + struct.pack("<I", len(samples))
        + samples
    )


@pytest.fixture(scope="session")
def short_lesson():
    """A ~40 s synthetic lesson with known phrase boundaries and notes."""
    return make_lesson(seed=3, target_duration=40.0)


@pytest.fixture
def silence_buffer():
    return AudioBuffer(np.zeros(22050), 22050)
