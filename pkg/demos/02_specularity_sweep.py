#!/usr/bin/env python3
"""Sweep the coating specularity and score each setting for normal recovery.

A semi-specular coating concentrates the shading response around the
surface normal, which helps photometric stereo up to a point; push the
specularity too far and most pixels fall outside any highlight.  The
RGB-to-normal linearity score makes that trade-off measurable: this
script sweeps the pad coating of the flat sensor and prints the curve.
"""

import argparse

from tacstudio.designs import shipped_design_path
from tacstudio.library import library_load
from tacstudio.objectives import ObjectiveConfig, rgb2normal_score
from tacstudio.optimize import Dimension, ParameterSpace, bind_params
from tacstudio.render import RenderConfig
from tacstudio.scene import assemble


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iterations", type=int, default=6)
    ap.add_argument("--photons", type=int, default=40_000)
    args = ap.parse_args()

    lib = library_load()
    base = assemble(shipped_design_path("mini_flat"), lib)
    space = ParameterSpace((Dimension(
        "spec", {"target": "specularity", "part": "pad"}, lo=0.0, hi=1.0),))
    cfg = ObjectiveConfig(
        indenter_radius=3.0, indent_depth=1.0, locations=4, seed=args.seed,
        render=RenderConfig(iterations=args.iterations,
                            photons_per_iter=args.photons,
                            r0_fraction=0.02, seed=args.seed))

    print("specularity  rgb2normal")
    best = (None, -1.0)
    for s in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
        design = bind_params(base, space, [s], library=lib)
        score = rgb2normal_score(design, cfg).score
        bar = "#" * int(round(score * 40))
        print(f"   {s:.1f}       {score:.4f}  {bar}")
        if score > best[1]:
            best = (s, score)
    print(f"best specularity: {best[0]:.1f} (score {best[1]:.4f})")


if __name__ == "__main__":
    main()
