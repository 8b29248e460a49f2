import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lessonlab.audio import AudioBuffer, WindowSpec
from lessonlab.errors import DegenerateProfileError
from lessonlab.segmentation import (
    EnergyProfile,
    SilenceLabels,
    adaptive_threshold,
    compute_rms,
    group_regions,
    label_silence,
    segment_lesson,
)
from lessonlab.separation import StemPair, passthrough_stems
from lessonlab.synth import sine_tone, speech_noise

SPEC = WindowSpec.for_rate(22050)


def labels_from_intervals(intervals, total_seconds, window_seconds=0.02):
    """Build per-window labels where the given intervals are non-silent."""
    n = round(total_seconds / window_seconds)
    flags = np.zeros(n, dtype=bool)
    for start, end in intervals:
        flags[round(start / window_seconds) : round(end / window_seconds)] = True
    return SilenceLabels(labels=flags, threshold=0.1)


class TestComputeRms:
    def test_zero_window(self):
        profile = compute_rms(AudioBuffer(np.zeros(441), 22050), SPEC)
        assert profile.rms.tolist() == [0.0]

    def test_constant_window(self):
        profile = compute_rms(AudioBuffer(np.full(441, 0.5), 22050), SPEC)
        assert profile.rms.tolist() == [0.5]

    def test_hand_evaluated_formula(self):
        # sqrt((1 + 0 + 1 + 0) / 4) = sqrt(0.5)
        spec = WindowSpec(window_seconds=4 / 22050, window_samples=4)
        profile = compute_rms(AudioBuffer(np.array([1.0, 0.0, 1.0, 0.0]), 22050), spec)
        assert profile.rms.tolist() == [math.sqrt(0.5)]

    def test_partial_tail_uses_own_length(self):
        spec = WindowSpec(window_seconds=2 / 22050, window_samples=2)
        profile = compute_rms(AudioBuffer(np.array([1.0, 1.0, 1.0]), 22050), spec)
        assert profile.rms.tolist() == [1.0, 1.0]

    def test_length_matches_ceil(self):
        profile = compute_rms(AudioBuffer(np.zeros(1000), 22050), SPEC)
        assert len(profile) == math.ceil(1000 / 441)

    def test_empty_buffer(self):
        assert len(compute_rms(AudioBuffer(np.zeros(0), 22050), SPEC)) == 0


class TestAdaptiveThreshold:
    def test_bimodal_profile_separates_exactly(self):
        # Oracle: brute-force over candidate thresholds shows a separating
        # band exists; the adaptive pick must land inside it.
        rng = np.random.default_rng(42)
        silence = rng.normal(0.01, 0.002, 500).clip(1e-4, None)
        signal = rng.normal(0.6, 0.03, 500)
        profile = EnergyProfile(np.concatenate([silence, signal]), 0.02)
        separating = [
            eps
            for eps in np.linspace(0, profile.rms.max(), 2000)
            if ((profile.rms >= eps) == np.concatenate([np.zeros(500, bool), np.ones(500, bool)])).all()
        ]
        assert separating, "constructed profile must be separable"
        eps = adaptive_threshold(profile, bins=100)
        assert 0.02 < eps < 0.55
        assert silence.max() < eps <= signal.min()
        labels = label_silence(profile, eps)
        assert not labels.labels[:500].any()
        assert labels.labels[500:].all()

    def test_single_valued_profile_degenerate(self):
        with pytest.raises(DegenerateProfileError):
            adaptive_threshold(EnergyProfile(np.full(100, 0.3), 0.02))

    def test_all_zero_profile_degenerate(self):
        with pytest.raises(DegenerateProfileError):
            adaptive_threshold(EnergyProfile(np.zeros(100), 0.02))

    def test_labels_monotone_in_rms(self):
        rng = np.random.default_rng(0)
        rms = np.concatenate([rng.uniform(0, 0.05, 300), rng.uniform(0.3, 0.9, 300)])
        profile = EnergyProfile(rms, 0.02)
        eps = adaptive_threshold(profile)
        labels = label_silence(profile, eps).labels
        for i in range(len(rms)):
            for j in range(i + 1, len(rms)):
                if labels[j] and rms[i] >= rms[j]:
                    assert labels[i]
                    break


class TestLabelSilence:
    def test_basic(self):
        profile = EnergyProfile(np.array([0.0, 0.5]), 0.02)
        assert label_silence(profile, 0.1).labels.tolist() == [False, True]

    def test_zero_threshold_all_true(self):
        profile = EnergyProfile(np.array([0.0, 0.2]), 0.02)
        assert label_silence(profile, 0.0).labels.tolist() == [True, True]

    def test_above_max_all_false(self):
        profile = EnergyProfile(np.array([0.1, 0.2]), 0.02)
        assert label_silence(profile, 0.3).labels.tolist() == [False, False]

    @given(st.floats(0, 1), st.floats(0, 1))
    @settings(max_examples=60)
    def test_raising_threshold_never_adds_labels(self, a, b):
        lo, hi = sorted([a, b])
        profile = EnergyProfile(np.linspace(0, 1, 50), 0.02)
        low = label_silence(profile, lo).labels
        high = label_silence(profile, hi).labels
        assert not (high & ~low).any()


class TestGroupRegions:
    def test_small_gap_merges(self):
        labels = labels_from_intervals([(0.0, 0.5), (1.0, 2.2)], 3.0)
        regions = group_regions(labels, 0.02)
        assert len(regions) == 1
        assert regions[0].start == pytest.approx(0.0)
        assert regions[0].end == pytest.approx(2.2)

    def test_large_gap_splits(self):
        labels = labels_from_intervals([(0.0, 1.5), (4.0, 5.5)], 6.0)
        regions = group_regions(labels, 0.02)
        assert len(regions) == 2

    def test_short_region_removed(self):
        labels = labels_from_intervals([(0.0, 0.8)], 2.0)
        assert group_regions(labels, 0.02) == []

    def test_exactly_one_second_kept(self):
        labels = labels_from_intervals([(0.0, 1.0)], 2.0)
        assert len(group_regions(labels, 0.02)) == 1

    def test_two_short_runs_merge_then_survive(self):
        # 0.6 s + 0.6 s runs one second apart merge into a 2.2 s region
        labels = labels_from_intervals([(0.0, 0.6), (1.6, 2.2)], 3.0)
        regions = group_regions(labels, 0.02)
        assert len(regions) == 1
        assert regions[0].duration == pytest.approx(2.2)

    def test_regions_sorted_disjoint_and_stateful(self):
        labels = labels_from_intervals([(0.0, 1.2), (4.0, 5.5), (9.0, 10.5)], 12.0)
        regions = group_regions(labels, 0.02, track="voice")
        assert [r.state for r in regions] == ["to_learn"] * 3
        assert [r.source for r in regions] == ["auto"] * 3
        assert all(a.end <= b.start for a, b in zip(regions, regions[1:]))
        assert all(r.duration >= 1.0 for r in regions)

    @given(st.lists(st.booleans(), min_size=1, max_size=400))
    @settings(max_examples=80)
    def test_merge_idempotence(self, flags):
        labels = SilenceLabels(labels=np.array(flags, dtype=bool), threshold=0.1)
        regions = group_regions(labels, 0.02)
        implied = np.zeros(len(flags), dtype=bool)
        for region in regions:
            implied[round(region.start / 0.02) : round(region.end / 0.02)] = True
        again = group_regions(SilenceLabels(labels=implied, threshold=0.1), 0.02)
        assert [(r.start, r.end) for r in again] == [(r.start, r.end) for r in regions]


class TestSegmentLesson:
    def test_passthrough_silent_voice_has_no_regions(self):
        mix = np.concatenate([sine_tone(440, 3.0, amplitude=0.5), np.zeros(22050)])
        stems = passthrough_stems(AudioBuffer(mix, 22050))
        result = segment_lesson(stems)
        assert result.voice_regions == []
        assert len(result.instrument_regions) == 1
        assert result.threshold_fallback["voice"] is True

    def test_synthetic_speech_then_tone(self):
        rng = np.random.default_rng(5)
        floor = 1.5e-3
        voice = np.concatenate(
            [speech_noise(3.0, amplitude=0.4, rng=rng), rng.standard_normal(3 * 22050) * floor]
        )
        instrument = np.concatenate(
            [rng.standard_normal(3 * 22050) * floor, sine_tone(440, 3.0, amplitude=0.6)]
        )
        stems = StemPair(AudioBuffer(voice, 22050), AudioBuffer(instrument, 22050))
        result = segment_lesson(stems)
        assert len(result.voice_regions) == 1
        assert len(result.instrument_regions) == 1
        assert result.voice_regions[0].start == pytest.approx(0.0, abs=0.1)
        assert result.voice_regions[0].end == pytest.approx(3.0, abs=0.1)
        assert result.instrument_regions[0].start == pytest.approx(3.0, abs=0.1)
        assert result.instrument_regions[0].end == pytest.approx(6.0, abs=0.1)

    def test_empty_stems(self):
        stems = StemPair(AudioBuffer(np.zeros(0), 22050), AudioBuffer(np.zeros(0), 22050))
        result = segment_lesson(stems)
        assert result.voice_regions == [] and result.instrument_regions == []

    def test_determinism(self, short_lesson):
        a = segment_lesson(short_lesson.stems)
        b = segment_lesson(short_lesson.stems)
        assert [(r.start, r.end) for r in a.instrument_regions] == [
            (r.start, r.end) for r in b.instrument_regions
        ]
        assert a.instrument_threshold == b.instrument_threshold

    def test_regions_contain_non_silent_windows(self, short_lesson):
        result = segment_lesson(short_lesson.stems)
        rms = result.instrument_profile.rms
        for region in result.instrument_regions:
            lo = round(region.start / 0.02)
            hi = round(region.end / 0.02)
            assert (rms[lo:hi] >= result.instrument_threshold).any()
