"""HTTP API: design store, preview renders, and background jobs.

All heavy work funnels through :mod:`tacstudio.service.core`, the same code
path the CLI uses, so CLI and HTTP agree on validation and results.  Designs
are copy-on-write: a job snapshots the assembled design when submitted, so a
concurrent PATCH creates a new version without disturbing running work.
PATCH returns 409 only while a job that requested ``"lock": true`` on the
design is still running.
"""

import json
import os
import secrets
import threading
from pathlib import Path

from fastapi import FastAPI, Request, Response

from ..library import library_load
from ..optimize import Dimension, ParameterSpace
from . import core
from .jobs import JobStore


class DesignStore:
    """In-memory designs persisted as JSON under ``workspace/designs``."""

    def __init__(self, workspace, library):
        self.root = Path(workspace) / "designs"
        self.root.mkdir(parents=True, exist_ok=True)
        self.workspace = Path(workspace)
        self.library = library
        self._designs = {}
        self._lock = threading.Lock()
        self._recover()

    def _recover(self):
        for f in self.root.glob("*/design.json"):
            try:
                rec = json.loads(f.read_text())
                design = core.load_design_doc(
                    rec["document"], self.library, self.workspace,
                    name=rec.get("name", "design"))
            except (OSError, ValueError, KeyError):
                continue
            self._designs[f.parent.name] = {
                "name": rec.get("name", "design"),
                "document": rec["document"],
                "design": design,
                "version": rec.get("version", 1),
                "locked_by": None,
            }

    def _persist(self, design_id):
        entry = self._designs[design_id]
        d = self.root / design_id
        d.mkdir(parents=True, exist_ok=True)
        (d / "design.json").write_text(json.dumps(
            {"name": entry["name"], "version": entry["version"],
             "document": entry["document"]}, indent=2) + "\n")

    def create(self, doc, name="design"):
        design = core.load_design_doc(doc, self.library, self.workspace,
                                      name=name)
        design_id = secrets.token_hex(8)
        with self._lock:
            self._designs[design_id] = {
                "name": name, "document": doc, "design": design,
                "version": 1, "locked_by": None,
            }
        self._persist(design_id)
        return design_id

    def get(self, design_id):
        with self._lock:
            return self._designs.get(design_id)

    def update(self, design_id, design, document=None):
        with self._lock:
            entry = self._designs[design_id]
            entry["design"] = design
            if document is not None:
                entry["document"] = document
            entry["version"] += 1
            version = entry["version"]
        self._persist(design_id)
        return version


def _json_error(status, record):
    return Response(content=json.dumps(record), status_code=status,
                    media_type="application/json")


def create_app(workspace=None, max_workers=None, library=None, ui_dir=None):
    workspace = Path(workspace or core.default_workspace())
    workspace.mkdir(parents=True, exist_ok=True)
    library = library or library_load()
    app = FastAPI(title="tacstudio")
    designs = DesignStore(workspace, library)
    jobs = JobStore(workspace, max_workers=max_workers)
    app.state.designs = designs
    app.state.jobs = jobs
    app.state.workspace = workspace

    def design_or_404(design_id):
        entry = designs.get(design_id)
        if entry is None:
            raise LookupError(f"unknown design {design_id!r}")
        return entry

    @app.exception_handler(core.ServiceError)
    async def _service_error(request, exc):
        return _json_error(422, exc.record)

    @app.exception_handler(LookupError)
    async def _not_found(request, exc):
        return _json_error(404, {"error": "NotFound", "message": str(exc)})

    @app.get("/library")
    def get_library():
        return library.summary()

    @app.post("/designs", status_code=201)
    async def post_design(request: Request):
        body = await request.json()
        doc = body.get("document", body)
        name = body.get("name", "design")
        design_id = designs.create(doc, name=name)
        entry = designs.get(design_id)
        return {"id": design_id, "version": entry["version"],
                "report": entry["design"].validation_report()}

    @app.get("/designs/{design_id}")
    def get_design(design_id: str):
        entry = design_or_404(design_id)
        return {"id": design_id, "name": entry["name"],
                "version": entry["version"], "document": entry["document"],
                "report": entry["design"].validation_report()}

    @app.patch("/designs/{design_id}/params")
    async def patch_params(design_id: str, request: Request):
        entry = design_or_404(design_id)
        locker = entry["locked_by"]
        if locker is not None:
            job = jobs.get(locker)
            if job is not None and job.state in ("queued", "running"):
                return _json_error(409, {
                    "error": "DesignLocked",
                    "message": f"design {design_id} is locked by running "
                               f"job {locker}"})
            entry["locked_by"] = None
        body = await request.json()
        updates = body.get("params", [])
        if not updates:
            raise core.ServiceError("BadPatch", "params list is empty")
        try:
            dims = tuple(
                Dimension(u.get("name", f"p{i}"), u["binding"],
                          choices=(u["value"],))
                for i, u in enumerate(updates))
            space = ParameterSpace(dims)
            new_design = core.bind_params(
                entry["design"], space, [u["value"] for u in updates],
                library=library)
        except (KeyError, TypeError, ValueError) as exc:
            raise core.ServiceError("BadPatch", exc) from exc
        version = designs.update(design_id, new_design)
        return {"id": design_id, "version": version,
                "report": new_design.validation_report()}

    @app.get("/designs/{design_id}/preview")
    def get_preview(design_id: str, seed: int = 0, res: str | None = None):
        entry = design_or_404(design_id)
        design = entry["design"]
        w = h = None
        if res is not None:
            w, h = core.parse_resolution(res)
        png = core.preview_png_bytes(design, seed=seed, width=w, height=h)
        return Response(content=png, media_type="image/png",
                        headers={"X-Design-Version": str(entry["version"])})

    # ---- jobs ------------------------------------------------------------

    def _run_render(entry, req):
        design = entry["design"]
        if req.get("indent"):
            design = core.apply_indent_preset(design, req["indent"])
        cfg = core.RenderConfig(
            iterations=int(req.get("iterations", 32)),
            photons_per_iter=int(req.get("photons_per_iter", 100_000)),
            seed=int(req.get("seed", 0)))
        w = h = None
        if req.get("res"):
            w, h = core.parse_resolution(req["res"])

        def run(job, set_progress):
            return core.render_to_files(design, job.directory, cfg,
                                        width=w, height=h,
                                        progress=set_progress)
        return run

    def _run_evaluate(entry, req):
        design = entry["design"]
        if req.get("indent"):
            design = core.apply_indent_preset(design, req["indent"])
        objective = req.get("objective", "all")
        if objective != "all" and objective not in core.OBJECTIVES:
            raise core.ServiceError(
                "UnknownObjective",
                f"unknown objective {objective!r}; valid: "
                f"{', '.join(sorted(core.OBJECTIVES))} or 'all'")
        cfg = core.objective_config(req.get("config"))

        def run(job, set_progress):
            if objective == "all":
                reports = {}
                names = list(core.OBJECTIVES)
                for i, name in enumerate(names):
                    reports[name] = core.evaluate(design, name, cfg)
                    set_progress((i + 1) / len(names))
                reports["summary"] = {n: r["score"]
                                      for n, r in reports.items()}
                report = reports
            else:
                report = core.evaluate(design, objective, cfg)
            (job.directory / "report.json").write_text(
                json.dumps(report, indent=2, default=str) + "\n")
            return report
        return run

    def _run_optimize(entry, req):
        design = entry["design"]
        space = core.parse_space(req["space"])
        try:
            space.validate_against(design)
        except (KeyError, ValueError) as exc:
            raise core.ServiceError("BadSpace", exc) from exc
        method = req.get("method", "grid")
        if method not in ("grid", "cmaes"):
            raise core.ServiceError(
                "UnknownMethod", f"method must be grid or cmaes, "
                f"not {method!r}")
        objective = req.get("objective", "aoap")
        if objective not in core.OBJECTIVES:
            raise core.ServiceError(
                "UnknownObjective", f"unknown objective {objective!r}")
        budget = int(req.get("budget", 0))
        if budget < 1:
            raise core.ServiceError("BadBudget", "budget must be >= 1")
        cfg = core.objective_config(req.get("config"))
        seed = int(req.get("seed", 0))
        doc = entry["document"]

        def run(job, set_progress):
            opt = core.optimize(design, space, method, objective, budget,
                                seed=seed, cfg=cfg, library=library,
                                progress=set_progress)
            result = core.job_result_record(opt)
            (job.directory / "job.log").write_text(opt.log_text())
            best_doc = core.best_design_doc(doc, space, opt.best_params)
            (job.directory / "best_design.json").write_text(
                json.dumps(best_doc, indent=2) + "\n")
            result["log"] = str(job.directory / "job.log")
            result["best_design"] = str(job.directory / "best_design.json")
            return result
        return run

    RUNNERS = {"render": _run_render, "evaluate": _run_evaluate,
               "optimize": _run_optimize}

    @app.post("/jobs", status_code=201)
    async def post_job(request: Request):
        body = await request.json()
        kind = body.get("kind")
        if kind not in RUNNERS:
            raise core.ServiceError(
                "UnknownJobKind",
                f"kind must be one of {sorted(RUNNERS)}, not {kind!r}")
        design_id = body.get("design_id")
        entry = design_or_404(design_id)
        req = dict(body.get("request", {}))
        req["design_id"] = design_id
        req["design_version"] = entry["version"]
        fn = RUNNERS[kind](entry, req)   # validates eagerly -> 422 now
        job = jobs.submit(kind, req, fn)
        if body.get("lock"):
            entry["locked_by"] = job.id
        return {"id": job.id, "state": job.state}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise LookupError(f"unknown job {job_id!r}")
        rec = job.to_record()
        rec.pop("result", None)   # fetched via /result
        return rec

    @app.get("/jobs/{job_id}/result")
    def get_result(job_id: str, file: str | None = None):
        job = jobs.get(job_id)
        if job is None:
            raise LookupError(f"unknown job {job_id!r}")
        if job.state == "failed":
            return _json_error(409, {"error": "JobFailed",
                                     "message": job.error})
        if job.state != "done":
            return _json_error(409, {"error": "JobNotFinished",
                                     "message": f"state is {job.state}"})
        if file is not None:
            kinds = {"png": "image/png", "pfm": "application/octet-stream"}
            if file not in kinds or not isinstance(job.result, dict) \
                    or file not in job.result:
                raise LookupError(f"job {job_id} has no file {file!r}")
            data = Path(job.result[file]).read_bytes()
            return Response(content=data, media_type=kinds[file])
        return {"id": job.id, "kind": job.kind, "result": job.result}

    # built browser UI, when present (TACSTUDIO_UI or ./frontend/dist)
    ui_dir = ui_dir or os.environ.get("TACSTUDIO_UI") \
        or (Path.cwd() / "frontend" / "dist")
    if Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(workspace=None, host="127.0.0.1", port=8000, max_workers=None,
          ui_dir=None):
    import uvicorn

    app = create_app(workspace=workspace, max_workers=max_workers,
                     ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port)
