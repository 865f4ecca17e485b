#!/usr/bin/env python3
"""Enumerate point vs area emitters per light group and rank the designs.

The flat sensor has three light groups (red left, green right, blue
front).  Each group can be driven by a point LED or a flat area emitter,
giving 2^3 = 8 design variants.  A grid search scores every combination
with the RGB-to-normal objective and prints a ranked table.
"""

import argparse

from tacstudio.designs import shipped_design_path
from tacstudio.library import library_load
from tacstudio.objectives import ObjectiveConfig, rgb2normal_score
from tacstudio.optimize import Dimension, ParameterSpace, grid_search
from tacstudio.render import RenderConfig
from tacstudio.scene import assemble


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    lib = library_load()
    base = assemble(shipped_design_path("mini_flat"), lib)
    groups = sorted(base.light_groups())
    presets = ("point_topled_like", "area_flat_3528")
    space = ParameterSpace(tuple(
        Dimension(f"type_{g}", {"target": "light_preset", "group": g},
                  choices=presets) for g in groups))
    cfg = ObjectiveConfig(
        indenter_radius=3.0, indent_depth=1.0, locations=4, seed=args.seed,
        render=RenderConfig(iterations=2, photons_per_iter=10_000,
                            r0_fraction=0.02, seed=args.seed))

    job = grid_search(base, space, lambda d: rgb2normal_score(d, cfg).score,
                      budget=2 ** len(groups), library=lib,
                      objective_name="rgb2normal")

    print(f"rank  score   " + "  ".join(f"{g:>18s}" for g in groups))
    ranked = sorted(job.history, key=lambda e: -e[1])
    for rank, (params, score, _) in enumerate(ranked, start=1):
        row = "  ".join(f"{p:>18s}" for p in params)
        print(f"{rank:>4d}  {score:.4f}  {row}")


if __name__ == "__main__":
    main()
