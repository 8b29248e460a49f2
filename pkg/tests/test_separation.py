import numpy as np
import pytest

from lessonlab.audio import AudioBuffer, encode_wav
from lessonlab.errors import (
    SeparatorConfigError,
    SeparatorFailedError,
    SeparatorOutputMissingError,
    StemMismatchError,
)
from lessonlab.separation import StemPair, load_stems, passthrough_stems, run_external_separator


def write_wav(path, seconds, rate=22050, value=0.1):
    buf = AudioBuffer(np.full(round(seconds * rate), value), rate)
    path.write_bytes(encode_wav(buf, "float32"))
    return path


class TestLoadStems:
    def test_equal_durations(self, tmp_path):
        v = write_wav(tmp_path / "v.wav", 2.0)
        i = write_wav(tmp_path / "i.wav", 2.0)
        pair = load_stems(v, i)
        assert pair.voice.duration == pair.instrument.duration == 2.0

    def test_within_tolerance(self, tmp_path):
        v = write_wav(tmp_path / "v.wav", 10.00)
        i = write_wav(tmp_path / "i.wav", 10.01)
        pair = load_stems(v, i)
        assert abs(pair.voice.duration - pair.instrument.duration) <= 0.02

    def test_mismatch_rejected(self, tmp_path):
        v = write_wav(tmp_path / "v.wav", 10.0)
        i = write_wav(tmp_path / "i.wav", 12.0)
        with pytest.raises(StemMismatchError):
            load_stems(v, i)

    def test_resamples_to_canonical(self, tmp_path):
        v = write_wav(tmp_path / "v.wav", 1.0, rate=44100)
        i = write_wav(tmp_path / "i.wav", 1.0, rate=44100)
        pair = load_stems(v, i)
        assert pair.voice.sample_rate == pair.instrument.sample_rate == 22050


class TestPassthrough:
    def test_voice_is_silence(self):
        mix = AudioBuffer(np.full(22050 * 5, 0.4), 22050)
        pair = passthrough_stems(mix)
        assert not pair.voice.samples.any()
        assert pair.voice.duration == pair.instrument.duration == 5.0

    def test_empty_mix(self):
        pair = passthrough_stems(AudioBuffer(np.zeros(0), 22050))
        assert len(pair.voice) == len(pair.instrument) == 0

    def test_no_renormalization(self):
        mix = AudioBuffer(np.array([0.8, -0.8]), 22050)
        pair = passthrough_stems(mix)
        assert np.abs(pair.instrument.samples).max() == 0.8


STUB_OK = """\
import shutil, sys
src, outdir = sys.argv[1], sys.argv[2]
shutil.copy(src, outdir + "/vocals.wav")
shutil.copy(src, outdir + "/accompaniment.wav")
"""

STUB_FAIL = "import sys; sys.exit(1)\n"

STUB_NO_OUTPUT = "pass\n"


class TestExternalSeparator:
    def make_stub(self, tmp_path, body):
        stub = tmp_path / "stub.py"
        stub.write_text(body)
        return f"python3 {stub} {{input}} {{outdir}}"

    def test_passthrough_stub(self, tmp_path):
        mix = write_wav(tmp_path / "mix.wav", 1.0)
        template = self.make_stub(tmp_path, STUB_OK)
        pair = run_external_separator(mix, template, workdir=tmp_path / "out")
        assert isinstance(pair, StemPair)
        assert np.array_equal(pair.voice.samples, pair.instrument.samples)

    def test_missing_placeholder(self, tmp_path):
        with pytest.raises(SeparatorConfigError):
            run_external_separator(tmp_path / "mix.wav", "python3 stub.py {input}")

    def test_failing_stub(self, tmp_path):
        mix = write_wav(tmp_path / "mix.wav", 1.0)
        template = self.make_stub(tmp_path, STUB_FAIL)
        with pytest.raises(SeparatorFailedError):
            run_external_separator(mix, template, workdir=tmp_path / "out")

    def test_missing_outputs(self, tmp_path):
        mix = write_wav(tmp_path / "mix.wav", 1.0)
        template = self.make_stub(tmp_path, STUB_NO_OUTPUT)
        with pytest.raises(SeparatorOutputMissingError):
            run_external_separator(mix, template, workdir=tmp_path / "out")
