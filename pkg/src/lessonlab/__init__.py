"""lessonlab: turn raw instrument-lesson audio into interactive practice
tutorials.

Core pipeline: decode -> separate (adapter) -> segment -> track pitch ->
extract notes; plus scoring, segmentation evaluation, session state, an
HTTP service, and a CLI.
"""

from .audio import AudioBuffer, WindowSpec, decode_wav, encode_wav, normalize_peak, resample, windows
from .config import AppConfig, load_config
from .notes import MelodyCurve, Note, NoteSequence, contour_to_notes, extract_region_notes, freq_to_midi
from .pitch import PitchContour, PitchFrame, YinEstimator, estimate_contour, filter_confident
from .scoring import ScoreReport, apply_manual_score, lcs_length, mismatch_blocks, query_regions, score_performance
from .segmentation import Region, adaptive_threshold, compute_rms, group_regions, label_silence, segment_lesson
from .separation import StemPair, load_stems, passthrough_stems, run_external_separator
from .session import SessionState, SessionStore

__version__ = "0.1.0"
