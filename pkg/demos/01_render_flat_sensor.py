#!/usr/bin/env python3
"""Render the shipped flat sensor design and write HDR + tonemapped output.

Walks the basic pipeline end to end: load the component library, assemble
a design file, press a sphere into the pad, run the photon-mapping
renderer, and save the result as .pfm (HDR) and .png (tonemapped).
"""

import argparse
import time
from pathlib import Path

from tacstudio.designs import shipped_design_path
from tacstudio.library import library_load
from tacstudio.render import RenderConfig, render_sppm, tonemap, \
    write_pfm, write_png
from tacstudio.scene import IndentationSpec, assemble, indent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("demo_out"))
    ap.add_argument("--iterations", type=int, default=16)
    ap.add_argument("--photons", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    lib = library_load()
    s = lib.summary()
    print(f"library: {len(s['materials'])} materials, {len(s['lights'])} "
          f"light presets, {len(s['cameras'])} cameras")

    design = assemble(shipped_design_path("mini_flat"), lib)
    report = design.validation_report()
    print(f"design {report['name']}: {len(report['parts'])} parts, "
          f"{len(report['light_groups'])} light groups")

    # press a 4 mm sphere 1 mm into the pad center
    pressed = indent(design, IndentationSpec(sphere_center=(0.0, 0.0, 0.0),
                                             radius=4.0, depth=1.0))

    cfg = RenderConfig(iterations=args.iterations,
                       photons_per_iter=args.photons, seed=args.seed)
    t0 = time.time()
    img = render_sppm(pressed, cfg, width=design.camera.width,
                      height=design.camera.height,
                      progress=lambda f: print(f"  {f * 100:3.0f}%", end="\r"))
    print(f"\nrendered in {time.time() - t0:.1f}s")

    write_pfm(img, args.out / "flat_indent.pfm")
    write_png(tonemap(img, exposure_ev=0.0), args.out / "flat_indent.png")
    print("wrote", args.out / "flat_indent.pfm", "and .png")


if __name__ == "__main__":
    main()
