"""Shared validation/execution core used by both the CLI and the HTTP API.

Keeping one implementation behind both front ends guarantees that a design
rejected by `validate` is rejected with the same error record by POST
/designs, and that renders and reports are identical for identical inputs.
"""

import json
import os
from pathlib import Path

import numpy as np

from ..library import library_load
from ..objectives import ObjectiveConfig, aoap_score, normdiff_score, \
    rgb2normal_score, warp_score
from ..optimize import Dimension, ParameterSpace, bind_params, \
    cmaes_optimize, grid_search
from ..render import RenderConfig, render_sppm, tonemap, write_pfm, write_png
from ..scene import assemble, assemble_dict, indent

WORKSPACE_ENV = "TACSTUDIO_WORKSPACE"

OBJECTIVES = {
    "rgb2normal": rgb2normal_score,
    "normdiff": normdiff_score,
    "aoap": aoap_score,
    "warp": warp_score,
}
FAST_OBJECTIVES = ("aoap", "warp")   # probe-only, no photon tracing

PREVIEW_ITERATIONS = 4


class ServiceError(ValueError):
    """Validation/request failure with a machine-readable record."""

    def __init__(self, kind, message):
        super().__init__(message)
        self.record = {"error": kind, "message": str(message)}


def default_workspace():
    return Path(os.environ.get(WORKSPACE_ENV, os.getcwd()))


def load_design(path, library=None, workspace=None):
    """Assemble a design file, mapping failures to a shared error record."""
    library = library or library_load()
    try:
        return assemble(path, library, workspace_root=workspace)
    except (ValueError, KeyError) as exc:
        raise ServiceError(type(exc).__name__, exc) from exc


def load_design_doc(doc, library, workspace, name="design"):
    try:
        return assemble_dict(doc, library, Path(workspace), Path(workspace),
                             name=name)
    except (ValueError, KeyError) as exc:
        raise ServiceError(type(exc).__name__, exc) from exc


def apply_indent_preset(design, preset):
    if preset not in design.indentation_presets:
        raise ServiceError(
            "UnknownIndentation",
            f"no indentation preset {preset!r}; have "
            f"{sorted(design.indentation_presets)}")
    return indent(design, design.indentation_presets[preset])


def parse_resolution(text):
    try:
        w, h = (int(p) for p in str(text).lower().split("x"))
    except ValueError as exc:
        raise ServiceError("BadResolution",
                           f"resolution must look like 160x120: {text!r}") \
            from exc
    if w < 1 or h < 1:
        raise ServiceError("BadResolution",
                           "resolution must be at least 1x1")
    return w, h


def render_to_files(design, out_dir, config, width=None, height=None,
                    progress=None, stem="render"):
    """Full render written as PFM + PNG + JSON metadata; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    img = render_sppm(design, config, width=width, height=height,
                      progress=progress)
    img = tonemap(img, exposure_ev=design.camera.exposure_ev,
                  saturation=True)
    pfm = out_dir / f"{stem}.pfm"
    png = out_dir / f"{stem}.png"
    meta = out_dir / f"{stem}.json"
    write_pfm(img, pfm)
    write_png(img, png)
    meta.write_text(json.dumps(img.metadata, indent=2, default=str) + "\n")
    return {"pfm": str(pfm), "png": str(png), "metadata": str(meta)}


def objective_config(doc=None):
    """ObjectiveConfig from a JSON-style dict; 'render' is nested."""
    doc = dict(doc or {})
    render = doc.pop("render", None)
    if render is not None:
        doc["render"] = RenderConfig(**render)
    try:
        return ObjectiveConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise ServiceError("BadObjectiveConfig", exc) from exc


def evaluate(design, objective, cfg=None):
    """One named objective, or all four, as plain-dict reports."""
    cfg = cfg or ObjectiveConfig()
    if objective == "all":
        reports = {name: evaluate(design, name, cfg)
                   for name in OBJECTIVES}
        reports["summary"] = {name: r["score"]
                              for name, r in reports.items()}
        return reports
    if objective not in OBJECTIVES:
        raise ServiceError(
            "UnknownObjective",
            f"unknown objective {objective!r}; valid: "
            f"{', '.join(sorted(OBJECTIVES))} or 'all'")
    report = OBJECTIVES[objective](design, cfg)
    return {"objective": report.objective, "score": report.score,
            "breakdown": report.breakdown, "provenance": report.provenance}


def parse_space(doc):
    """ParameterSpace from {'dimensions': [{name, binding, lo/hi/choices,
    grid}]}."""
    try:
        dims = tuple(
            Dimension(d["name"], d["binding"], lo=d.get("lo"),
                      hi=d.get("hi"),
                      choices=tuple(d["choices"]) if "choices" in d else None,
                      grid=d.get("grid"))
            for d in doc["dimensions"])
        return ParameterSpace(dims)
    except (KeyError, TypeError, ValueError) as exc:
        raise ServiceError("BadSpace", exc) from exc


def optimize(design, space, method, objective, budget, seed=0, cfg=None,
             library=None, progress=None):
    """Run one optimization; returns the finished OptimizationJob."""
    if budget < 1:
        raise ServiceError("BadBudget", "budget must be >= 1")
    cfg = cfg or ObjectiveConfig()

    evals = 0

    def score(d):
        nonlocal evals
        value = evaluate(d, objective, cfg)["score"]
        evals += 1
        if progress is not None:
            progress(min(evals / budget, 1.0))
        return value

    if method == "grid":
        return grid_search(design, space, score, budget, library=library,
                           objective_name=objective)
    if method == "cmaes":
        try:
            return cmaes_optimize(design, space, score, budget, seed=seed,
                                  library=library, objective_name=objective)
        except ValueError as exc:
            raise ServiceError("BadBudget", exc) from exc
    raise ServiceError("UnknownMethod",
                       f"method must be grid or cmaes, not {method!r}")


def job_result_record(job):
    return {
        "method": job.method,
        "objective": job.objective_name,
        "budget": job.budget,
        "evaluations": len(job.history),
        "best_params": job.best_params,
        "best_score": job.best_score,
        "history": [{"params": p, "score": s, "seconds": t}
                    for p, s, t in job.history],
    }


def best_design_doc(base_doc, space, params):
    """Design document annotated with the winning parameter bindings."""
    doc = json.loads(json.dumps(base_doc))  # deep copy
    doc["optimized_params"] = [
        {"name": dim.name, "binding": dim.binding, "value": value}
        for dim, value in zip(space.dimensions, params)]
    return doc


def preview_png_bytes(design, seed=0, width=None, height=None):
    """Fast low-iteration render for interactive steering."""
    import io

    from PIL import Image

    w = width or max(design.camera.width // 2, 16)
    h = height or max(design.camera.height // 2, 12)
    cfg = RenderConfig(iterations=PREVIEW_ITERATIONS,
                       photons_per_iter=20_000, seed=seed)
    img = render_sppm(design, cfg, width=w, height=h)
    img = tonemap(img, exposure_ev=design.camera.exposure_ev,
                  saturation=True)
    quant = np.floor(np.clip(img.ldr, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(quant, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


__all__ = [
    "OBJECTIVES", "FAST_OBJECTIVES", "ServiceError", "apply_indent_preset",
    "best_design_doc", "default_workspace", "evaluate", "job_result_record",
    "load_design", "load_design_doc", "objective_config", "optimize",
    "parse_resolution", "parse_space", "preview_png_bytes",
    "render_to_files", "bind_params",
]
