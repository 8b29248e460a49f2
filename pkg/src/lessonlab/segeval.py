"""Segmentation evaluation: frame-level precision/recall/F1 and
segment-level boundary similarity, with random and uniform baselines.

Boundary similarity works on integer boundary positions (1 s granularity
by default). Boundaries from the two segmentations are paired within a
near-miss window; a pair costs distance/window, an unpaired boundary
costs 1, and similarity is 1 - cost / (pairs + misses). The pairing is
the exact optimum over all feasible matchings, found by a
non-crossing dynamic program (for sorted positions and absolute-distance
costs a non-crossing optimal matching always exists).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from statistics import pstdev

import numpy as np

from .notes import round_half_away
from .segmentation import Region

FRAME_SECONDS = 0.02
GRANULARITY_SECONDS = 1.0
NEAR_MISS_WINDOW = 5

METRICS = ("precision", "recall", "f1", "boundary_similarity")
CONDITIONS = ("algorithm", "random", "uniform")


@dataclass(frozen=True)
class FrameLabeling:
    labels: np.ndarray  # True = instrument playing
    frame_seconds: float = FRAME_SECONDS

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=bool)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class BoundarySet:
    positions: tuple[int, ...]

    def __post_init__(self):
        if list(self.positions) != sorted(set(self.positions)):
            raise ValueError("positions must be strictly increasing")


def _check_disjoint(regions: list[Region]) -> list[Region]:
    ordered = sorted(regions, key=lambda r: r.start)
    for prev, curr in zip(ordered, ordered[1:]):
        if curr.start < prev.end - 1e-9:
            raise ValueError(f"regions {prev.id} and {curr.id} overlap")
    return ordered


def regions_to_frames(
    regions: list[Region], duration: float, frame_seconds: float = FRAME_SECONDS
) -> FrameLabeling:
    """Frame i is positive iff its center lies inside some region
    (half-open [start, end))."""
    ordered = _check_disjoint(regions)
    n = int(np.ceil(duration / frame_seconds - 1e-9))
    labels = np.zeros(n, dtype=bool)
    for region in ordered:
        lo = int(np.ceil(region.start / frame_seconds - 0.5 - 1e-9))
        hi = int(np.ceil(region.end / frame_seconds - 0.5 - 1e-9))
        labels[max(lo, 0) : min(hi, n)] = True
    return FrameLabeling(labels=labels, frame_seconds=frame_seconds)


def frame_metrics(predicted: FrameLabeling, truth: FrameLabeling) -> dict[str, float]:
    if len(predicted) != len(truth):
        raise ValueError("frame labelings differ in length")
    p, t = predicted.labels, truth.labels
    tp = int(np.sum(p & t))
    fp = int(np.sum(p & ~t))
    fn = int(np.sum(~p & t))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def regions_to_boundaries(
    regions: list[Region], granularity: float = GRANULARITY_SECONDS
) -> BoundarySet:
    """Region starts and ends rounded to the nearest granularity unit;
    duplicates collapse."""
    positions = set()
    for region in regions:
        positions.add(round_half_away(region.start / granularity))
        positions.add(round_half_away(region.end / granularity))
    return BoundarySet(positions=tuple(sorted(positions)))


def boundary_similarity(a: BoundarySet, b: BoundarySet, near_miss_window: int = NEAR_MISS_WINDOW) -> float:
    """Similarity in [0, 1]; identical sets give 1, sets with every
    boundary at least the window apart give 0. Two empty sets give 1."""
    if near_miss_window < 1:
        raise ValueError("near_miss_window must be >= 1")
    pa = np.asarray(a.positions, dtype=np.float64)
    pb = np.asarray(b.positions, dtype=np.float64)
    na, nb = len(pa), len(pb)
    total = na + nb
    if total == 0:
        return 1.0
    kmax = min(na, nb)
    w = float(near_miss_window)

    # f[j, k]: minimum summed pair distance using a[:i], b[:j] with k pairs
    f = np.full((nb + 1, kmax + 1), np.inf)
    f[:, 0] = 0.0
    for i in range(1, na + 1):
        dist = np.abs(pa[i - 1] - pb)
        cost = np.where(dist < w, dist, np.inf)
        paired = np.full_like(f, np.inf)
        paired[1:, 1:] = f[:-1, :-1] + cost[:, None]
        f = np.minimum.accumulate(np.minimum(f, paired), axis=0)

    best = 0.0
    final = f[nb]
    for k in range(kmax + 1):
        if np.isfinite(final[k]):
            misses = total - 2 * k
            sim = 1.0 - (final[k] / w + misses) / (k + misses)
            best = max(best, sim)
    return best


def random_baseline(truth_regions: list[Region], duration: float, rng_seed: int) -> list[Region]:
    """Same region count as truth, boundaries drawn uniformly on [0, duration]."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    k = len(truth_regions)
    rng = np.random.default_rng(rng_seed)
    points = np.sort(rng.uniform(0.0, duration, size=2 * k))
    regions = []
    for start, end in points.reshape(-1, 2):
        if end > start:
            regions.append(
                Region(id=f"random-{len(regions):03d}", start=float(start), end=float(end), track="instrument")
            )
    return regions


def uniform_baseline(truth_regions: list[Region], duration: float) -> list[Region]:
    """Tile [0, duration] alternating the truth's mean region length with
    its mean gap, starting at t=0."""
    if not truth_regions:
        raise ValueError("truth regions must be nonempty")
    k = len(truth_regions)
    lengths = [r.duration for r in truth_regions]
    mean_length = sum(lengths) / k
    total_gap = max(duration - sum(lengths), 0.0)
    mean_gap = total_gap / max(k - 1, 1)
    regions = []
    t = 0.0
    while t < duration - 1e-9:
        end = min(t + mean_length, duration)
        if end - t > 1e-9:
            regions.append(
                Region(id=f"uniform-{len(regions):03d}", start=t, end=end, track="instrument")
            )
        t += mean_length + mean_gap
        if mean_length + mean_gap <= 1e-9:
            break
    return regions


@dataclass
class CorpusEntry:
    name: str
    predicted: list[Region]
    truth: list[Region]
    duration: float


@dataclass
class EvalReport:
    per_video: list[dict]
    aggregate: dict[str, dict[str, dict[str, float]]]  # condition -> metric -> {mean, sd}

    def to_json(self) -> dict:
        return {"per_video": self.per_video, "aggregate": self.aggregate}

    def format_table(self) -> str:
        labels = {
            "precision": "Precision",
            "recall": "Recall",
            "f1": "F1 Score",
            "boundary_similarity": "Boundary Similarity",
        }
        header = f"{'':24}" + "".join(f"{c.capitalize():>18}" for c in CONDITIONS)
        lines = [header]
        for metric in METRICS:
            cells = "".join(
                f"{self.aggregate[c][metric]['mean']:>10.3f} ({self.aggregate[c][metric]['sd']:.2f})"
                for c in CONDITIONS
            )
            lines.append(f"{labels[metric]:24}" + cells)
        return "\n".join(lines)


def _entry_metrics(predicted: list[Region], truth: list[Region], duration: float) -> dict[str, float]:
    metrics = frame_metrics(
        regions_to_frames(predicted, duration), regions_to_frames(truth, duration)
    )
    metrics["boundary_similarity"] = boundary_similarity(
        regions_to_boundaries(predicted), regions_to_boundaries(truth)
    )
    return metrics


def evaluate_corpus(entries: list[CorpusEntry], rng_seed: int = 0) -> EvalReport:
    """Score algorithm output and both baselines against truth for every
    entry; aggregate mean and population SD per metric and condition."""
    if not entries:
        raise ValueError("corpus is empty")
    per_video = []
    for index, entry in enumerate(entries):
        conditions = {
            "algorithm": entry.predicted,
            "random": random_baseline(entry.truth, entry.duration, rng_seed + index),
            "uniform": uniform_baseline(entry.truth, entry.duration),
        }
        per_video.append(
            {"name": entry.name}
            | {c: _entry_metrics(regions, entry.truth, entry.duration) for c, regions in conditions.items()}
        )
    aggregate = {}
    for condition in CONDITIONS:
        aggregate[condition] = {}
        for metric in METRICS:
            values = [video[condition][metric] for video in per_video]
            aggregate[condition][metric] = {
                "mean": sum(values) / len(values),
                "sd": pstdev(values) if len(values) > 1 else 0.0,
            }
    return EvalReport(per_video=per_video, aggregate=aggregate)
