"""Note-sequence comparison: correctness score, missed notes, mismatch
blocks, and melody-based region querying.

The score is pitch-only by design: how many reference notes appear, in
order, in the recording. Timing is visualized, never graded.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from difflib import SequenceMatcher
from typing import Sequence

from .errors import EmptyQueryError, EmptyTargetError
from .notes import NoteSequence, midi_to_name
from .segmentation import Region

DEFAULT_QUERY_THRESHOLD = 80.0


@dataclass(frozen=True)
class MismatchSpan:
    """Half-open note-index intervals that fall outside matching blocks."""

    target_range: tuple[int, int]
    recording_range: tuple[int, int]


@dataclass(frozen=True)
class ScoreReport:
    score_percent: float
    matched_count: int
    target_count: int
    missed_notes: tuple[str, ...]
    mismatch_spans: tuple[MismatchSpan, ...]
    overridden: bool = False
    manual_score: float | None = None

    @property
    def effective_score(self) -> float:
        return self.manual_score if self.overridden else self.score_percent

    def to_json(self) -> dict:
        return {
            "score": self.score_percent,
            "matched": self.matched_count,
            "target_total": self.target_count,
            "missed": list(self.missed_notes),
            "spans": [
                {"t": list(s.target_range), "r": list(s.recording_range)}
                for s in self.mismatch_spans
            ],
            "overridden": self.overridden,
            "manual": self.manual_score,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ScoreReport":
        return cls(
            score_percent=data["score"],
            matched_count=data["matched"],
            target_count=data["target_total"],
            missed_notes=tuple(data["missed"]),
            mismatch_spans=tuple(
                MismatchSpan(tuple(s["t"]), tuple(s["r"])) for s in data["spans"]
            ),
            overridden=data["overridden"],
            manual_score=data["manual"],
        )


def lcs_length(a: Sequence[int], b: Sequence[int]) -> int:
    """Longest common subsequence length under exact equality."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, 1):
            curr.append(prev[j - 1] + 1 if x == y else max(curr[j - 1], prev[j]))
        prev = curr
    return prev[-1]


def _lcs_match_pairs(a: Sequence[int], b: Sequence[int]) -> list[tuple[int, int]]:
    """One canonical optimal LCS alignment as (a_index, b_index) pairs.

    The walk prefers matches at the smallest target (a) index, which
    makes the derived missed-note list deterministic.
    """
    n, m = len(a), len(b)
    suffix = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, nxt = suffix[i], suffix[i + 1]
        for j in range(m - 1, -1, -1):
            row[j] = nxt[j + 1] + 1 if a[i] == b[j] else max(nxt[j], row[j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i, j = i + 1, j + 1
        elif suffix[i][j + 1] == suffix[i][j]:
            j += 1  # keep a[i] available for the earliest possible match
        else:
            i += 1
    return pairs


def mismatch_blocks(target: Sequence[int], recording: Sequence[int]) -> list[MismatchSpan]:
    """Complement of Ratcliff-Obershelp matching blocks, as index spans.

    Ties for the longest block resolve earliest-in-target then
    earliest-in-recording (difflib's documented behavior).
    """
    matcher = SequenceMatcher(None, list(target), list(recording), autojunk=False)
    spans = []
    prev_t = prev_r = 0
    for block in matcher.get_matching_blocks():
        if block.a > prev_t or block.b > prev_r:
            spans.append(MismatchSpan((prev_t, block.a), (prev_r, block.b)))
        prev_t, prev_r = block.a + block.size, block.b + block.size
    return spans


def score_performance(target: NoteSequence, recording: NoteSequence) -> ScoreReport:
    """Score a recording against a reference: 100 * |LCS(T, R)| / |T|."""
    if len(target) == 0:
        raise EmptyTargetError("reference sequence has no notes")
    t_midis, r_midis = target.midis(), recording.midis()
    pairs = _lcs_match_pairs(t_midis, r_midis)
    matched = len(pairs)
    matched_targets = {i for i, _ in pairs}
    missed = tuple(
        midi_to_name(m) for i, m in enumerate(t_midis) if i not in matched_targets
    )
    return ScoreReport(
        score_percent=round(100.0 * matched / len(t_midis), 2),
        matched_count=matched,
        target_count=len(t_midis),
        missed_notes=missed,
        mismatch_spans=tuple(mismatch_blocks(t_midis, r_midis)),
    )


def _range_to_interval(index_range: tuple[int, int], notes: NoteSequence) -> tuple[float, float]:
    lo, hi = index_range
    if hi > lo:
        first = notes.notes[lo]
        last = notes.notes[hi - 1]
        return (first.onset, last.onset + last.duration)
    # empty range: zero-width marker at the insertion point's neighbor boundary
    if lo > 0:
        prev = notes.notes[lo - 1]
        t = prev.onset + prev.duration
    elif lo < len(notes.notes):
        t = notes.notes[lo].onset
    else:
        t = 0.0
    return (t, t)


def spans_to_time(
    spans: Sequence[MismatchSpan], target: NoteSequence, recording: NoteSequence
) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Map note-index spans onto [start, end] time intervals per sequence."""
    target_intervals = [_range_to_interval(s.target_range, target) for s in spans]
    recording_intervals = [_range_to_interval(s.recording_range, recording) for s in spans]
    return target_intervals, recording_intervals


def query_regions(
    query: NoteSequence,
    candidates: Sequence[tuple[Region, NoteSequence]],
    match_threshold: float = DEFAULT_QUERY_THRESHOLD,
) -> list[Region]:
    """Regions whose sequences score strictly above the threshold against
    the query (the query's own source region trivially qualifies)."""
    if len(query) == 0:
        raise EmptyQueryError("query sequence has no notes")
    q = query.midis()
    matches = []
    for region, sequence in candidates:
        # 100 * lcs > threshold * |q| keeps the comparison exact at the boundary
        if 100.0 * lcs_length(q, sequence.midis()) > match_threshold * len(q):
            matches.append(region)
    return matches


def apply_manual_score(report: ScoreReport, manual: float) -> ScoreReport:
    """Mark the report overridden; automatic fields stay for audit."""
    if not 0 <= manual <= 100:
        raise ValueError("manual score must lie in [0, 100]")
    return replace(report, overridden=True, manual_score=round(float(manual), 2))
