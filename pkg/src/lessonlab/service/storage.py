"""Filesystem lesson storage.

Layout: <root>/lessons/<lesson_id>/{manifest.json, media.*, stems/*.wav}
and <root>/sessions/<lesson_id>/<user_id>.json (owned by SessionStore).
"""

from __future__ import annotations

import threading
from pathlib import Path

from ..manifest import LessonManifest
from ..pipeline import load_lesson_stems
from ..separation import StemPair


class LessonStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.lessons_dir = self.root / "lessons"
        self.uploads_dir = self.root / "uploads"
        self.lessons_dir.mkdir(parents=True, exist_ok=True)
        self.uploads_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._manifest_cache: dict[str, tuple[float, LessonManifest]] = {}
        self._stem_cache: dict[str, tuple[float, StemPair]] = {}

    def lesson_dir(self, lesson_id: str) -> Path:
        return self.lessons_dir / lesson_id

    def exists(self, lesson_id: str) -> bool:
        return (self.lesson_dir(lesson_id) / "manifest.json").exists()

    def manifest_bytes(self, lesson_id: str) -> bytes:
        path = self.lesson_dir(lesson_id) / "manifest.json"
        if not path.exists():
            raise KeyError(lesson_id)
        return path.read_bytes()

    def manifest(self, lesson_id: str) -> LessonManifest:
        import json

        path = self.lesson_dir(lesson_id) / "manifest.json"
        if not path.exists():
            raise KeyError(lesson_id)
        mtime = path.stat().st_mtime_ns
        with self._lock:
            cached = self._manifest_cache.get(lesson_id)
            if cached and cached[0] == mtime:
                return cached[1]
        parsed = LessonManifest.from_json(json.loads(path.read_text()))
        with self._lock:
            self._manifest_cache[lesson_id] = (mtime, parsed)
        return parsed

    def stems(self, lesson_id: str) -> StemPair:
        path = self.lesson_dir(lesson_id) / "stems" / "instrument.wav"
        if not path.exists():
            raise KeyError(lesson_id)
        mtime = path.stat().st_mtime_ns
        with self._lock:
            cached = self._stem_cache.get(lesson_id)
            if cached and cached[0] == mtime:
                return cached[1]
        stems = load_lesson_stems(self.lesson_dir(lesson_id))
        with self._lock:
            self._stem_cache[lesson_id] = (mtime, stems)
        return stems

    def media_path(self, lesson_id: str) -> Path | None:
        directory = self.lesson_dir(lesson_id)
        if not directory.exists():
            return None
        for candidate in sorted(directory.glob("media.*")):
            return candidate
        return None

    def new_lesson_id(self) -> str:
        import uuid

        return uuid.uuid4().hex[:12]
