"""In-memory preprocessing job registry.

Jobs run on a single worker thread: preprocessing is CPU-bound and study
deployments upload one lesson at a time. Status only moves forward
(queued -> running -> done | failed) and polling never mutates state.
"""

from __future__ import annotations

import threading
import traceback
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable


@dataclass
class Job:
    job_id: str
    status: str = "queued"
    progress: float = 0.0
    stage: str | None = None
    error: str | None = None
    result: str | None = None

    def to_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "status": self.status,
            "progress": round(self.progress, 3),
            "stage": self.stage,
            "error": self.error,
            "result": self.result,
        }


class JobRegistry:
    def __init__(self, workers: int = 1):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="preprocess")

    def submit(self, work: Callable[[Callable[[float, str], None]], str]) -> dict:
        """Queue ``work``; it receives a progress callback and returns a
        lesson id. Returns the job's initial (queued) snapshot."""
        job = Job(job_id=uuid.uuid4().hex[:12])
        with self._lock:
            self._jobs[job.job_id] = job

        def progress(fraction: float, stage: str) -> None:
            with self._lock:
                job.progress = max(job.progress, min(fraction, 1.0))
                job.stage = stage

        def run() -> None:
            with self._lock:
                job.status = "running"
            try:
                result = work(progress)
            except Exception as exc:  # surfaced through the job, not the worker
                with self._lock:
                    job.status = "failed"
                    job.error = f"{type(exc).__name__}: {exc}"
                    job.stage = "failed"
                traceback.print_exc()
                return
            with self._lock:
                job.status = "done"
                job.progress = 1.0
                job.result = result

        snapshot = job.to_json()
        self._pool.submit(run)
        return snapshot

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def wait_all(self) -> None:
        self._pool.shutdown(wait=True)
