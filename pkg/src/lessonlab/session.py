"""Per-lesson, per-user learning state.

Regions progress to_learn -> started -> aced and never move backward;
aced is absorbing. History counts how often each region was played,
looped, recorded, and aced. State is persisted as one JSON document per
(lesson, user) with an optimistic-concurrency revision.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorruptSessionError, RegionNotFoundError, RevisionConflictError

SCHEMA_VERSION = 1

STATES = ("to_learn", "started", "aced")
EVENT_KINDS = ("entered", "played", "looped", "recorded", "score_overridden")
_COUNTED = {"played": "played", "looped": "looped", "recorded": "recorded"}


def _fresh_history() -> dict[str, int]:
    return {"played": 0, "looped": 0, "recorded": 0, "aced": 0}


@dataclass
class SessionState:
    lesson_id: str
    user_id: str = "default"
    region_states: dict[str, str] = field(default_factory=dict)
    history: dict[str, dict[str, int]] = field(default_factory=dict)
    scores: dict[str, list[dict]] = field(default_factory=dict)
    user_regions: list[dict] = field(default_factory=list)
    deleted_ids: list[str] = field(default_factory=list)
    user_region_seq: int = 0
    revision: int = 0

    def knows(self, region_id: str) -> bool:
        return region_id in self.region_states

    def register_region(self, region_id: str) -> None:
        if region_id not in self.region_states:
            self.region_states[region_id] = "to_learn"
            self.history[region_id] = _fresh_history()

    def apply(self, region_id: str, kind: str, score: float | None = None) -> None:
        """Apply one practice event; bumps the revision.

        Any event starts a to_learn region; an event carrying an
        effective score of exactly 100 aces it. Aced never demotes.
        """
        if region_id not in self.region_states:
            raise RegionNotFoundError(f"unknown region {region_id!r}")
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        history = self.history.setdefault(region_id, _fresh_history())
        if kind in _COUNTED:
            history[_COUNTED[kind]] += 1
        if self.region_states[region_id] == "to_learn":
            self.region_states[region_id] = "started"
        if kind in ("recorded", "score_overridden") and score == 100:
            history["aced"] += 1
            self.region_states[region_id] = "aced"
        self.revision += 1

    def summary(self, region_ids: list[str]) -> dict[str, int]:
        """Progression counts over the given current regions."""
        counts = {state: 0 for state in STATES}
        for region_id in region_ids:
            counts[self.region_states.get(region_id, "to_learn")] += 1
        return counts

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "lesson_id": self.lesson_id,
            "user_id": self.user_id,
            "revision": self.revision,
            "region_states": self.region_states,
            "history": self.history,
            "scores": self.scores,
            "user_regions": self.user_regions,
            "deleted_ids": self.deleted_ids,
            "user_region_seq": self.user_region_seq,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SessionState":
        return cls(
            lesson_id=data["lesson_id"],
            user_id=data.get("user_id", "default"),
            region_states=dict(data.get("region_states", {})),
            history={k: dict(v) for k, v in data.get("history", {}).items()},
            scores={k: list(v) for k, v in data.get("scores", {}).items()},
            user_regions=list(data.get("user_regions", [])),
            deleted_ids=list(data.get("deleted_ids", [])),
            user_region_seq=data.get("user_region_seq", 0),
            revision=data.get("revision", 0),
        )


def progression_summary(state: SessionState, region_ids: list[str]) -> dict[str, int]:
    return state.summary(region_ids)


class SessionStore:
    """Filesystem store: sessions/<lesson_id>/<user_id>.json.

    Writes are serialized per process and rejected when the stored
    revision is not older than the incoming one.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()

    def _path(self, lesson_id: str, user_id: str) -> Path:
        return self.root / lesson_id / f"{user_id}.json"

    def load(self, lesson_id: str, user_id: str, manifest_region_ids: list[str] | None = None) -> SessionState:
        path = self._path(lesson_id, user_id)
        if not path.exists():
            state = SessionState(lesson_id=lesson_id, user_id=user_id)
            for region_id in manifest_region_ids or []:
                state.register_region(region_id)
            return state
        try:
            data = json.loads(path.read_text())
            state = SessionState.from_json(data)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorruptSessionError(f"cannot parse session document {path}") from exc
        for region_id in manifest_region_ids or []:
            state.register_region(region_id)
        return state

    def save(self, state: SessionState) -> None:
        path = self._path(state.lesson_id, state.user_id)
        with self._lock:
            if path.exists():
                try:
                    stored = json.loads(path.read_text()).get("revision", -1)
                except json.JSONDecodeError as exc:
                    raise CorruptSessionError(f"cannot parse session document {path}") from exc
                if stored >= state.revision:
                    raise RevisionConflictError(
                        f"stored revision {stored} >= incoming {state.revision}"
                    )
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(state.to_json(), indent=2))
            tmp.replace(path)
