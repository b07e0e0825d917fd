"""Desk-scale figure renders, kept as 8-bit golden images for regression tests.

``python -m hmcolor.figures [outdir]`` rewrites the goldens.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import numpy as np

from .core import Exponent
from .filter import apply_stage, box_kernel, disk_image
from .imageio import read_png, to_display, write_png
from .shading import Scene, light_preset, shade_diffuse

SHADE_PRESETS = ("tetrahedron", "octahedron")
SHADE_PS = ("1", "2", "2.5", "3", "4", "inf")
DISK_PS = ("-2", "-1", "-0.5", "0.5", "1", "2", "3", "4")
SIZE = 256
DISK_KERNEL_HALF = 7  # 15x15 box


def figure_specs():
    """``(name, render)`` pairs; each render returns an 8-bit ``(H, W, 3)`` array."""
    specs = []
    for preset in SHADE_PRESETS:
        for p in SHADE_PS:
            specs.append((f"shade_{preset}_p{p}", _shade_render(preset, p)))
    for p in DISK_PS:
        specs.append((f"disk_box15_p{p}", _disk_render(p)))
    return specs


def _shade_render(preset, p):
    def render():
        img = shade_diffuse(Scene(light_preset(preset), SIZE), Exponent.parse(p))
        return to_display(img, "clamp")
    return render


def _disk_render(p):
    def render():
        img = apply_stage(disk_image(SIZE), box_kernel(DISK_KERNEL_HALF), Exponent.parse(p))
        return to_display(img, "clamp")
    return render


def render_all() -> dict[str, np.ndarray]:
    return {name: render() for name, render in figure_specs()}


def write_goldens(outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, image in render_all().items():
        path = outdir / f"{name}.png"
        write_png(path, image, 8)
        paths.append(path)
    return paths


def compare_to_goldens(outdir, images: dict[str, np.ndarray] | None = None) -> dict[str, int]:
    """Largest per-pixel difference (in 8-bit levels) against each golden."""
    images = render_all() if images is None else images
    diffs = {}
    for name, image in images.items():
        golden, _ = read_png(os.path.join(outdir, f"{name}.png"))
        if golden.shape != image.shape:
            diffs[name] = 255
            continue
        diffs[name] = int(np.abs(golden.astype(int) - image.astype(int)).max())
    return diffs


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    outdir = argv[0] if argv else os.path.join("tests", "golden")
    for path in write_goldens(outdir):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
