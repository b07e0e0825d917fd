"""Command-line front end: ``hmcolor <subcommand> ...``.

Exit codes: 0 success, 1 usage/IO/domain error, 2 property failure (verify).
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

import numpy as np

from . import affine, verify
from .compositing import Layer, add_phase_composite, generalized_composite, over
from .core import Exponent
from .errors import HMError
from .filter import DEFAULT_EPS, load_kernel, pipeline
from .imageio import DISPLAY_MODES, PhasedImage, load_stem, save_stem, save_weight, stem_path
from .shading import (
    PRESETS,
    Scene,
    light_preset,
    load_scene_config,
    max_second_difference,
    profile_lights,
    shade_diffuse,
    terminator_indices,
    terminator_profile,
)

EXIT_OK, EXIT_ERROR, EXIT_PROPERTY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share exit code 1 with other failures
        raise UsageError(f"{self.prog}: {message}")


def _exponent(text: str) -> Exponent:
    try:
        return Exponent.parse(text)
    except HMError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _triplet(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _fmt(values) -> str:
    return ",".join(f"{v:g}" for v in np.asarray(values, dtype=float) + 0.0)


def _add_output(sub):
    sub.add_argument("--out", required=True, help="output stem")
    sub.add_argument("--format", choices=("png", "pfm"), default="png")
    sub.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    sub.add_argument("--display", choices=DISPLAY_MODES, default="clamp")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hmcolor", description="Holder-Minkowski color tools")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = subs.add_parser("filter", help="H_p convolution, dilation and erosion")
    f.add_argument("--in", dest="input", required=True, help="input stem")
    f.add_argument("--kernel", default="box:1", help="kernel file or box:N")
    f.add_argument("--p", type=_exponent, action="append", default=[],
                   help="exponent (real, inf, -inf); repeat for a pipeline with --kernel")
    f.add_argument("--stage", action="append", default=[], help="p=..,kernel=.. (appended after --p stages)")
    f.add_argument("--eps", type=float, default=DEFAULT_EPS, help="lift for zero amplitudes at p < 0")
    _add_output(f)

    c = subs.add_parser("composite", help="combine a foreground and a background")
    c.add_argument("--fg", required=True, help="foreground stem")
    c.add_argument("--bg", required=True, help="background stem")
    c.add_argument("--mode", default="over", help="over|addphase|add|mul|max|min|hm:<p>")
    c.add_argument("--weight", type=float, default=0.5, help="scale for addphase")
    c.add_argument("--weights", choices=("alpha", "equal", "planes"), default="alpha",
                   help="projective weights for hm: shared alpha, equal, or the per-channel .w planes")
    c.add_argument("--eps", type=float, default=DEFAULT_EPS)
    _add_output(c)

    s = subs.add_parser("shade", help="render the sphere under point lights")
    s.add_argument("--preset", help=f"one of {', '.join(PRESETS)}")
    s.add_argument("--config", help="key=value scene file")
    s.add_argument("--p", type=_exponent)
    s.add_argument("--size", type=int)
    s.add_argument("--radius", type=float, default=3.0)
    s.add_argument("--eps-lift", action="store_true", help="lift zero diffuse terms for p < 0")
    s.add_argument("--profile", help="also write the two-light terminator profile to this CSV")
    _add_output(s)

    v = subs.add_parser("solve", help="fit light coefficients from observed colors")
    v.add_argument("--mode", choices=("linear", "bilinear"), required=True)
    v.add_argument("--colors", type=_triplet, nargs="+", required=True)

    r = subs.add_parser("verify", help="run the randomised property suites")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--cases", type=int, default=200)
    r.add_argument("--suite", action="append", choices=sorted(verify.SUITES))

    k = subs.add_parser("convert", help="re-encode an image stem")
    k.add_argument("--in", dest="input", required=True)
    _add_output(k)
    return parser


def _parse_stage(text: str, default_kernel: str):
    fields = dict(part.split("=", 1) for part in text.split(",") if "=" in part)
    if "p" not in fields or set(fields) - {"p", "kernel"}:
        raise UsageError(f"stage must look like p=<p>,kernel=<kernel>, got {text!r}")
    return load_kernel(fields.get("kernel", default_kernel)), _exponent(fields["p"])


def run_filter(args) -> int:
    img, weights = load_stem(args.input)
    kernel = load_kernel(args.kernel)
    stages = [(kernel, p) for p in args.p]
    stages += [_parse_stage(text, args.kernel) for text in args.stage]
    if not stages:
        raise UsageError("filter needs at least one --p or --stage")
    out = pipeline(img, stages, eps=args.eps)
    save_stem(out, args.out, args.format, args.bit_depth, args.display, with_phase=img.has_phase())
    return EXIT_OK


def _layer(stem) -> tuple[Layer, np.ndarray | None]:
    img, weights = load_stem(stem)
    if weights is None:
        return Layer.opaque(img), None
    alpha = np.clip(weights[:, :, 0], 0.0, 1.0)
    return Layer.from_straight(img, alpha), weights


def run_composite(args) -> int:
    fg, fg_w = _layer(args.fg)
    bg, bg_w = _layer(args.bg)
    mode = args.mode
    if mode == "addphase":
        out = add_phase_composite(bg.color, fg.color, args.weight)
        alpha = None
    else:
        if mode == "over":
            layer = over(fg, bg)
        else:
            op, p = mode, None
            if mode.startswith("hm:"):
                op, p = "hm", _exponent(mode[3:])
                if not p.is_finite:
                    raise UsageError("hm compositing takes a finite nonzero p")
                p = p.value
            weights = args.weights
            if weights == "planes":
                if fg_w is None or bg_w is None:
                    raise UsageError("--weights planes needs <stem>.w planes for both inputs")
                weights = (fg_w, bg_w)
            layer = generalized_composite(op, fg, bg, p=p, weights=weights, eps=args.eps)
        out = PhasedImage.from_complex(layer.straight())
        alpha = layer.alpha
    save_stem(out, args.out, args.format, args.bit_depth, args.display)
    if alpha is not None and not np.all(alpha == 1.0):
        save_weight(stem_path(args.out, "w", "pfm"), alpha)
    return EXIT_OK


def run_shade(args) -> int:
    if args.config:
        scene, p = load_scene_config(args.config)
    elif args.preset:
        scene, p = Scene(light_preset(args.preset, args.radius)), None
    else:
        raise UsageError("shade needs --preset or --config")
    if args.preset and args.config:
        scene = replace(scene, lights=tuple(light_preset(args.preset, args.radius)), weights=None)
    p = args.p or p
    if p is None:
        raise UsageError("shade needs --p (or p= in the config)")
    scene = replace(scene, size=args.size or scene.size, eps_lift=scene.eps_lift or args.eps_lift)
    img = shade_diffuse(scene, p)
    save_stem(img, args.out, args.format, args.bit_depth, args.display, with_phase=False)
    if args.profile:
        write_profile(args.profile, p, eps=scene.eps if scene.eps_lift else None)
    return EXIT_OK


def write_profile(path, p, eps=None) -> float:
    """Write the two-light great-circle profile; returns its terminator roughness."""
    lights = profile_lights()
    angles, shade = terminator_profile(lights, p, eps=eps)
    crossings = set(terminator_indices(lights))
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "angle", "shade", "terminator"])
        for i, (angle, value) in enumerate(zip(angles, shade)):
            writer.writerow([i, repr(float(angle)), repr(float(value)), int(i in crossings)])
    return max_second_difference(shade, sorted(crossings))


def run_solve(args) -> int:
    colors = args.colors
    if len({len(c) for c in colors}) != 1:
        raise UsageError("all colors need the same number of channels")
    if args.mode == "linear":
        if len(colors) != 2:
            raise UsageError(f"linear mode takes 2 colors, got {len(colors)}")
        a, b = affine.solve_linear_light(*colors)
        print(f"a = {_fmt(a)}")
        print(f"b = {_fmt(b)}")
    else:
        if len(colors) != 4:
            raise UsageError(f"bilinear mode takes 4 colors (c00 c01 c10 c11), got {len(colors)}")
        m = affine.solve_bilinear_lights(*colors)
        print(f"c00 = {_fmt(m.c00)}")
        print(f"dt1 = {_fmt(m.dt1)}")
        print(f"dt0 = {_fmt(m.dt0)}")
        print(f"dt0t1 = {_fmt(m.dt0t1)}")
    return EXIT_OK


def run_verify(args) -> int:
    if args.cases < 0:
        raise UsageError("--cases must be nonnegative")
    results = verify.run_suites(args.seed, args.cases, args.suite)
    print(verify.format_report(results, args.seed, args.cases))
    return EXIT_OK if all(r.ok for r in results) else EXIT_PROPERTY


def run_convert(args) -> int:
    img, weights = load_stem(args.input)
    save_stem(img, args.out, args.format, args.bit_depth, args.display)
    if weights is not None:
        save_weight(stem_path(args.out, "w", "pfm"), weights)
    return EXIT_OK


COMMANDS = {
    "filter": run_filter,
    "composite": run_composite,
    "shade": run_shade,
    "solve": run_solve,
    "verify": run_verify,
    "convert": run_convert,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (HMError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
