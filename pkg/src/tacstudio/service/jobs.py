"""Persistent job store with a bounded worker pool.

Every job owns a directory ``<workspace>/jobs/<id>/`` holding a
``record.json`` plus any artifacts; the record is rewritten on every state
change, so a restarted process recovers all finished work (jobs that were
mid-flight when the process died are marked failed on load).
"""

import json
import os
import secrets
import threading
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

JOB_STATES = ("queued", "running", "done", "failed")


class Job:
    def __init__(self, id, kind, request, directory):
        self.id = id
        self.kind = kind
        self.request = request
        self.directory = Path(directory)
        self.state = "queued"
        self.progress = 0.0
        self.result = None
        self.error = None
        self.created_at = time.time()
        self.finished_at = None
        self._lock = threading.Lock()

    def to_record(self):
        return {
            "id": self.id,
            "kind": self.kind,
            "request": self.request,
            "state": self.state,
            "progress": self.progress,
            "result": self.result,
            "error": self.error,
            "created_at": self.created_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_record(cls, rec, directory):
        job = cls(rec["id"], rec["kind"], rec["request"], directory)
        job.state = rec["state"]
        job.progress = rec["progress"]
        job.result = rec["result"]
        job.error = rec["error"]
        job.created_at = rec["created_at"]
        job.finished_at = rec["finished_at"]
        return job


class JobStore:
    """Submit/poll jobs; all state persisted under ``workspace/jobs``."""

    def __init__(self, workspace, max_workers=None):
        self.root = Path(workspace) / "jobs"
        self.root.mkdir(parents=True, exist_ok=True)
        self._jobs = {}
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(
            max_workers=max_workers or os.cpu_count() or 4)
        self._recover()

    def _recover(self):
        for rec_file in self.root.glob("*/record.json"):
            try:
                rec = json.loads(rec_file.read_text())
            except (OSError, ValueError):
                continue
            job = Job.from_record(rec, rec_file.parent)
            if job.state in ("queued", "running"):
                # the process that owned this job is gone
                job.state = "failed"
                job.error = "interrupted by service restart"
                job.finished_at = time.time()
                self._persist(job)
            self._jobs[job.id] = job

    def _persist(self, job):
        job.directory.mkdir(parents=True, exist_ok=True)
        tmp = job.directory / "record.json.tmp"
        tmp.write_text(json.dumps(job.to_record(), indent=2) + "\n")
        tmp.replace(job.directory / "record.json")

    def submit(self, kind, request, fn):
        """Queue ``fn(job, set_progress) -> result dict`` and return the job.

        ``set_progress`` accepts a fraction in [0, 1]; decreases are ignored
        so observed progress is monotone.
        """
        job_id = secrets.token_hex(16)  # 128-bit unguessable token
        job = Job(job_id, kind, request, self.root / job_id)
        with self._lock:
            self._jobs[job_id] = job
        self._persist(job)
        self._pool.submit(self._run, job, fn)
        return job

    def _run(self, job, fn):
        with job._lock:
            job.state = "running"
        self._persist(job)

        def set_progress(fraction):
            with job._lock:
                if job.state != "running":
                    return
                job.progress = max(job.progress,
                                   min(max(float(fraction), 0.0), 1.0))
            self._persist(job)

        try:
            result = fn(job, set_progress)
        except Exception as exc:  # job failures must not kill the worker
            # Write the traceback before flipping state so anyone who
            # observes "failed" can rely on the file being present.
            (job.directory / "traceback.txt").write_text(
                traceback.format_exc())
            with job._lock:
                job.state = "failed"
                job.error = f"{type(exc).__name__}: {exc}"
                job.finished_at = time.time()
        else:
            with job._lock:
                job.state = "done"
                job.progress = 1.0
                job.result = result
                job.finished_at = time.time()
        self._persist(job)

    def get(self, job_id):
        with self._lock:
            return self._jobs.get(job_id)

    def running_for(self, design_id):
        """Ids of queued/running jobs that reference a design."""
        with self._lock:
            return [j.id for j in self._jobs.values()
                    if j.state in ("queued", "running")
                    and j.request.get("design_id") == design_id]

    def wait(self, job_id, timeout=600.0, poll=0.05):
        """Block until the job reaches a terminal state (testing helper)."""
        deadline = time.time() + timeout
        while time.time() < deadline:
            job = self.get(job_id)
            if job is not None and job.state in ("done", "failed"):
                return job
            time.sleep(poll)
        raise TimeoutError(f"job {job_id} still not finished")

    def shutdown(self):
        self._pool.shutdown(wait=True)
