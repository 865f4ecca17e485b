"""Command-line front end: validate / render / evaluate / optimize / serve.

Every subcommand is a thin wrapper over :mod:`tacstudio.service.core`, so a
design that fails here fails identically over HTTP.  The workspace root
defaults to the current directory and can be overridden with the
``TACSTUDIO_WORKSPACE`` environment variable or ``--workspace``.
"""

import json
import sys
import time
from pathlib import Path

import click

from ..library import library_load
from ..render import RenderConfig
from . import core


def _fail(kind, message):
    """Machine-readable error record on stderr, exit 1."""
    record = {"error": kind, "message": str(message)}
    click.echo(json.dumps(record), err=True)
    sys.exit(1)


def _load(design_path, workspace, library):
    try:
        return core.load_design(design_path, library=library,
                                workspace=workspace)
    except core.ServiceError as exc:
        _fail(exc.record["error"], exc.record["message"])


workspace_option = click.option(
    "--workspace", type=click.Path(path_type=Path),
    default=None, help="Workspace root (default: $TACSTUDIO_WORKSPACE "
                       "or the current directory).")


@click.group()
def main():
    """Tactile sensor design studio."""


@main.command()
@click.argument("design", type=click.Path(exists=True, path_type=Path))
@workspace_option
def validate(design, workspace):
    """Assemble a design file and print a part/light/camera summary."""
    workspace = workspace or core.default_workspace()
    d = _load(design, workspace, library_load())
    click.echo(json.dumps(d.validation_report(), indent=2))


@main.command()
@click.argument("design", type=click.Path(exists=True, path_type=Path))
@click.option("--indent", "indent_preset", default=None,
              help="Named indentation preset to apply before rendering.")
@click.option("--out", type=click.Path(path_type=Path), default=Path("out"),
              show_default=True, help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--res", default=None, help="Resolution WxH "
              "(default: the design camera's).")
@click.option("--iterations", type=int, default=32, show_default=True)
@click.option("--photons-per-iter", type=int, default=100_000,
              show_default=True)
@workspace_option
def render(design, indent_preset, out, seed, res, iterations,
           photons_per_iter, workspace):
    """Render a tactile image (PFM + PNG + metadata)."""
    workspace = workspace or core.default_workspace()
    d = _load(design, workspace, library_load())
    try:
        if indent_preset:
            d = core.apply_indent_preset(d, indent_preset)
        w = h = None
        if res is not None:
            w, h = core.parse_resolution(res)
        cfg = RenderConfig(iterations=iterations,
                           photons_per_iter=photons_per_iter, seed=seed)
        paths = core.render_to_files(d, out, cfg, width=w, height=h)
    except (core.ServiceError, ValueError) as exc:
        kind = exc.record["error"] if isinstance(exc, core.ServiceError) \
            else type(exc).__name__
        _fail(kind, exc)
    click.echo(json.dumps(paths, indent=2))


@main.command()
@click.argument("design", type=click.Path(exists=True, path_type=Path))
@click.option("--objective", default="all", show_default=True,
              help="One of: " + ", ".join(sorted(core.OBJECTIVES))
                   + ", or 'all'.")
@click.option("--config", "config_file", default=None,
              type=click.Path(exists=True, path_type=Path),
              help="JSON file of objective-config overrides.")
@click.option("--indent", "indent_preset", default=None,
              help="Named indentation preset to apply before evaluating.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the report to this JSON file as well as stdout.")
@workspace_option
def evaluate(design, objective, config_file, indent_preset, out, workspace):
    """Score a design on one objective (or all four)."""
    workspace = workspace or core.default_workspace()
    d = _load(design, workspace, library_load())
    try:
        cfg_doc = json.loads(Path(config_file).read_text()) \
            if config_file else None
        cfg = core.objective_config(cfg_doc)
        if indent_preset:
            d = core.apply_indent_preset(d, indent_preset)
        report = core.evaluate(d, objective, cfg)
    except core.ServiceError as exc:
        _fail(exc.record["error"], exc.record["message"])
    text = json.dumps(report, indent=2, default=str)
    if out is not None:
        Path(out).write_text(text + "\n")
    click.echo(text)


@main.command()
@click.argument("design", type=click.Path(exists=True, path_type=Path))
@click.option("--space", "space_file", required=True,
              type=click.Path(exists=True, path_type=Path),
              help="JSON parameter-space file.")
@click.option("--method", type=click.Choice(["grid", "cmaes"]),
              default="grid", show_default=True)
@click.option("--objective", default="aoap", show_default=True)
@click.option("--budget", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_file", default=None,
              type=click.Path(exists=True, path_type=Path),
              help="JSON file of objective-config overrides.")
@click.option("--out", type=click.Path(path_type=Path), default=Path("out"),
              show_default=True, help="Directory for job log + best design.")
@workspace_option
def optimize(design, space_file, method, objective, budget, seed,
             config_file, out, workspace):
    """Search a parameter space; writes the evaluation log and the best
    design file."""
    workspace = workspace or core.default_workspace()
    library = library_load()
    d = _load(design, workspace, library)
    try:
        space = core.parse_space(json.loads(Path(space_file).read_text()))
        space.validate_against(d)
        cfg_doc = json.loads(Path(config_file).read_text()) \
            if config_file else None
        cfg = core.objective_config(cfg_doc)
        t0 = time.perf_counter()
        job = core.optimize(d, space, method, objective, budget, seed=seed,
                            cfg=cfg, library=library)
    except (core.ServiceError, KeyError, ValueError) as exc:
        kind = exc.record["error"] if isinstance(exc, core.ServiceError) \
            else type(exc).__name__
        _fail(kind, exc)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "job.log"
    log_path.write_text(job.log_text())
    base_doc = json.loads(Path(design).read_text())
    best_path = out / "best_design.json"
    best_path.write_text(json.dumps(
        core.best_design_doc(base_doc, space, job.best_params),
        indent=2) + "\n")
    click.echo(json.dumps({
        "method": method, "objective": objective,
        "evaluations": len(job.history),
        "best_score": job.best_score, "best_params": job.best_params,
        "seconds": time.perf_counter() - t0,
        "log": str(log_path), "best_design": str(best_path)}, indent=2))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--max-workers", type=int, default=None,
              help="Job worker pool size (default: core count).")
@workspace_option
def serve(host, port, max_workers, workspace):
    """Run the HTTP API."""
    from .app import serve as run_server

    workspace = workspace or core.default_workspace()
    run_server(workspace=workspace, host=host, port=port,
               max_workers=max_workers)


if __name__ == "__main__":
    main()
