"""Inverse-design search: grid enumeration and CMA-ES over design bindings.

A ParameterSpace names a handful of scalar or categorical knobs and says
which design field each one writes (coating specularity, a cage alpha
entry, a light coordinate or preset, the camera preset).  bind_params
materializes a parameter vector into a new SensorDesign; grid_search and
cmaes_optimize drive an objective callable over the space.
"""

import dataclasses
import itertools
import math
import time
import uuid
from dataclasses import dataclass, field

import numpy as np

from .mesh import CAGE_VERTS, deform
from .scene import SensorDesign

BINDING_TARGETS = ("specularity", "cage_alpha", "light_position",
                   "light_preset", "light_color", "camera_preset")

_COLOR_MASKS = {"R": (1.0, 0.0, 0.0), "G": (0.0, 1.0, 0.0),
                "B": (0.0, 0.0, 1.0), "W": (1.0, 1.0, 1.0)}


@dataclass(frozen=True)
class Dimension:
    """One search knob: continuous [lo, hi] or a discrete choice list."""

    name: str
    binding: dict
    lo: float | None = None
    hi: float | None = None
    choices: tuple | None = None
    grid: int | None = None          # samples for grid search (continuous)

    def __post_init__(self):
        if self.binding.get("target") not in BINDING_TARGETS:
            raise ValueError(f"unknown binding target in {self.name!r}")
        if self.continuous:
            if not self.lo < self.hi:
                raise ValueError(f"{self.name!r}: requires lo < hi")
        elif not self.choices:
            raise ValueError(f"{self.name!r}: empty choice list")

    @property
    def continuous(self):
        return self.choices is None

    def grid_values(self):
        if not self.continuous:
            return list(self.choices)
        if not self.grid or self.grid < 1:
            raise ValueError(
                f"{self.name!r}: continuous dimension needs a grid count")
        return [float(v) for v in np.linspace(self.lo, self.hi, self.grid)]


@dataclass(frozen=True)
class ParameterSpace:
    dimensions: tuple

    def __post_init__(self):
        object.__setattr__(self, "dimensions", tuple(self.dimensions))
        if not self.dimensions:
            raise ValueError("parameter space is empty")
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")

    @property
    def ndim(self):
        return len(self.dimensions)

    def validate_against(self, design):
        for dim in self.dimensions:
            _resolve_binding(design, dim.binding)


@dataclass
class OptimizationJob:
    id: str
    design: SensorDesign
    space: ParameterSpace
    objective_name: str
    method: str
    budget: int
    state: str = "pending"
    history: list = field(default_factory=list)  # (params, score, seconds)
    best_params: list | None = None
    best_score: float = -math.inf
    error: str | None = None

    def record(self, params, score, seconds):
        if len(self.history) >= self.budget:
            raise RuntimeError("budget exhausted")
        self.history.append((list(params), float(score), float(seconds)))
        if score > self.best_score:
            self.best_score = float(score)
            self.best_params = list(params)

    def log_text(self):
        """Append-only evaluation log: one line per evaluation."""
        lines = [f"# job {self.id} method={self.method} "
                 f"objective={self.objective_name} budget={self.budget}"]
        for params, score, seconds in self.history:
            p = " ".join(repr(v) for v in params)
            lines.append(f"{score!r}\t{seconds:.3f}\t{p}")
        return "\n".join(lines) + "\n"


def _new_job(design, space, objective_name, method, budget):
    return OptimizationJob(id=uuid.uuid4().hex, design=design, space=space,
                           objective_name=objective_name, method=method,
                           budget=budget)


# ---------------------------------------------------------------------------
# parameter binding

def _resolve_binding(design, binding):
    target = binding["target"]
    if target == "specularity":
        part = design.part(binding["part"])
        if not hasattr(part.material, "specularity"):
            raise ValueError(f"part {part.name!r} has no specularity knob")
    elif target == "cage_alpha":
        part = design.part(binding["part"])
        if part.blend is None or part.cage is None:
            raise ValueError(f"part {part.name!r} has no deformation cage")
        idx = binding["index"]
        if not 0 <= idx < CAGE_VERTS * 3:
            raise ValueError("cage_alpha index out of range")
    elif target in ("light_position", "light_color"):
        idx = binding["light"]
        if not 0 <= idx < len(design.lights):
            raise ValueError("light index out of range")
        if target == "light_position" and binding["axis"] not in (0, 1, 2):
            raise ValueError("light axis must be 0, 1, or 2")
    elif target == "light_preset":
        group = binding["group"]
        if group not in design.light_groups():
            raise ValueError(f"no light group {group!r}")
    # camera_preset needs only a library at bind time


def bind_params(design, space, params, library=None):
    """New design with each parameter written to its bound field."""
    params = list(params)
    if len(params) != space.ndim:
        raise ValueError("parameter vector does not match space")
    parts = list(design.parts)
    lights = list(design.lights)
    camera = design.camera
    alpha_updates = {}  # part name -> {flat index: value}

    for dim, value in zip(space.dimensions, params):
        binding = dim.binding
        _resolve_binding(design, binding)
        target = binding["target"]
        if target == "specularity":
            for i, p in enumerate(parts):
                if p.name == binding["part"]:
                    parts[i] = dataclasses.replace(
                        p, material=dataclasses.replace(
                            p.material, specularity=float(value)))
        elif target == "cage_alpha":
            alpha_updates.setdefault(binding["part"], {})[
                int(binding["index"])] = float(value)
        elif target == "light_position":
            li, axis = binding["light"], binding["axis"]
            lt = lights[li]
            attr = "position" if lt.kind == "point" else "center"
            pos = np.array(getattr(lt, attr), float)
            pos[axis] = float(value)
            lights[li] = dataclasses.replace(lt, **{attr: pos})
        elif target == "light_color":
            li = binding["light"]
            lt = lights[li]
            mask = np.array(_COLOR_MASKS[value])
            attr = ("intensity_rgb" if lt.kind == "point" else "radiance_rgb")
            level = float(np.max(getattr(lt, attr)))
            lights[li] = dataclasses.replace(
                lt, color=value, **{attr: level * mask})
        elif target == "light_preset":
            if library is None:
                raise ValueError("light_preset binding needs a library")
            preset = library.light(value)
            for i, lt in enumerate(lights):
                if lt.group_id != binding["group"]:
                    continue
                anchor = (lt.position if lt.kind == "point" else lt.center)
                orient = (lt.orientation if lt.kind == "point" else lt.normal)
                attr = ("intensity_rgb" if lt.kind == "point"
                        else "radiance_rgb")
                lights[i] = preset.instantiate(
                    position=anchor, orientation=orient, color=lt.color,
                    group_id=lt.group_id,
                    scale=float(np.max(getattr(lt, attr))))
        elif target == "camera_preset":
            if library is None:
                raise ValueError("camera_preset binding needs a library")
            camera = library.camera(value).instantiate(
                position=camera.position, look_at=camera.look_at,
                up=camera.up)

    for name, updates in alpha_updates.items():
        for i, p in enumerate(parts):
            if p.name != name:
                continue
            alpha = p.blend.alpha.copy()
            for flat, value in updates.items():
                alpha[flat // 3, flat % 3] = value
            blend = dataclasses.replace(p.blend, alpha=alpha)
            parts[i] = dataclasses.replace(
                p, blend=blend, mesh=deform(p.base_mesh, p.cage, blend))
    return dataclasses.replace(design, parts=tuple(parts),
                               lights=tuple(lights), camera=camera)


# ---------------------------------------------------------------------------
# grid search

def grid_search(design, space, objective, budget, library=None,
                objective_name="objective"):
    """Evaluate the full Cartesian grid, row-major (first dimension
    slowest), truncated at budget; ties go to the first maximum."""
    values = [dim.grid_values() for dim in space.dimensions]
    job = _new_job(design, space, objective_name, "grid", budget)
    job.state = "running"
    try:
        for combo in itertools.islice(itertools.product(*values), budget):
            t0 = time.perf_counter()
            score = float(objective(bind_params(design, space, combo,
                                                library=library)))
            job.record(combo, score, time.perf_counter() - t0)
    except Exception as exc:  # pragma: no cover - surfaced via job state
        job.state = "failed"
        job.error = f"{type(exc).__name__}: {exc}"
        raise
    job.state = "done"
    return job


# ---------------------------------------------------------------------------
# CMA-ES

def default_lambda(n):
    return 4 + int(3 * math.log(n))


def cmaes_optimize(design, space, objective, budget, sigma0=0.3, seed=0,
                   library=None, objective_name="objective", x0=None):
    """Standard (mu/mu_w, lambda) CMA-ES, maximizing, in coordinates
    normalized to the unit box; candidates are clamped before evaluation.

    sigma0 and x0 are in normalized units (default start: box center).
    """
    dims = space.dimensions
    if any(not d.continuous for d in dims):
        raise ValueError("cmaes requires all-continuous dimensions")
    n = len(dims)
    lam = default_lambda(n)
    if budget < lam:
        raise ValueError(f"budget must be at least lambda = {lam}")
    lo = np.array([d.lo for d in dims])
    hi = np.array([d.hi for d in dims])

    mu = lam // 2
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mueff = 1.0 / np.sum(w ** 2)
    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n ** 2))

    rng = np.random.default_rng(seed)
    m = np.full(n, 0.5) if x0 is None else np.asarray(x0, float)
    sigma = float(sigma0)
    C = np.eye(n)
    ps = np.zeros(n)
    pc = np.zeros(n)
    eigen_b = np.eye(n)
    eigen_d = np.ones(n)

    job = _new_job(design, space, objective_name, "cmaes", budget)
    job.state = "running"
    evals = 0
    gen = 0
    while evals + lam <= budget:
        gen += 1
        z = rng.standard_normal((lam, n))
        y = z @ (eigen_b * eigen_d).T
        x = np.clip(m + sigma * y, 0.0, 1.0)
        y = (x - m) / sigma  # keep consistency after clamping
        scores = np.empty(lam)
        for k in range(lam):
            t0 = time.perf_counter()
            candidate = lo + x[k] * (hi - lo)
            scores[k] = float(objective(bind_params(design, space, candidate,
                                                    library=library)))
            job.record(candidate, scores[k], time.perf_counter() - t0)
        evals += lam
        order = np.argsort(-scores, kind="stable")[:mu]
        y_w = w @ y[order]
        m = m + sigma * y_w

        c_inv_sqrt = eigen_b @ np.diag(1.0 / eigen_d) @ eigen_b.T
        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) \
            * (c_inv_sqrt @ y_w)
        hsig = (np.linalg.norm(ps)
                / math.sqrt(1 - (1 - cs) ** (2 * gen)) / chi_n
                < 1.4 + 2 / (n + 1))
        pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * y_w
        rank1 = np.outer(pc, pc)
        rank_mu = (y[order] * w[:, None]).T @ y[order]
        C = ((1 - c1 - cmu) * C
             + c1 * (rank1 + (not hsig) * cc * (2 - cc) * C)
             + cmu * rank_mu)
        sigma *= math.exp(cs / damps * (np.linalg.norm(ps) / chi_n - 1))

        C = (C + C.T) / 2
        evals_d, eigen_b = np.linalg.eigh(C)
        eigen_d = np.sqrt(np.maximum(evals_d, 1e-20))
    job.state = "done"
    return job
