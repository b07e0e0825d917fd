"""Sphere under N point lights, with per-light diffuse terms combined by H_p.

The scene is a unit sphere at the origin seen by an orthographic camera on
the +z axis.  Each light contributes ``d_i = max(n . l_i, 0) * I_i`` (no
distance falloff); the pixel value is the projected equal-weight ``H_p``
of the ``d_i``.  ``p = 1`` is the usual sum-average and shows the kink at
every terminator; larger ``p`` smooths it and ``p -> inf`` is the maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import Exponent, ExponentKind, power_mean_planes
from .errors import UnknownPreset, UnsupportedExponent
from .imageio import PhasedImage

LIGHT_RADIUS = 3.0
DEFAULT_EPS = 1e-6
PRESETS = ("tetrahedron", "octahedron", "grid3x3")


@dataclass(frozen=True)
class PointLight:
    position: tuple
    intensity: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        object.__setattr__(self, "intensity", tuple(float(c) for c in self.intensity))
        if len(self.position) != 3:
            raise ValueError("light position must be a 3-vector")
        if any(c < 0 for c in self.intensity):
            raise ValueError("light intensity must be nonnegative")


@dataclass(frozen=True)
class Scene:
    lights: tuple
    size: int = 256
    weights: tuple | None = None
    eps_lift: bool = False
    eps: float = DEFAULT_EPS
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lights", tuple(self.lights))
        if not self.lights:
            raise ValueError("a scene needs at least one light")
        if self.size < 1:
            raise ValueError("image size must be positive")
        if self.weights is not None and len(self.weights) != len(self.lights):
            raise ValueError("one weight per light is required")

    @property
    def channels(self) -> int:
        return len(self.lights[0].intensity)


def _rotation_to_z(axis) -> np.ndarray:
    """Rotation matrix taking the unit vector ``axis`` onto +z."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    z = np.array([0.0, 0.0, 1.0])
    v = np.cross(a, z)
    s, c = np.linalg.norm(v), a @ z
    if s == 0:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx * ((1 - c) / s**2)


def light_preset(name: str, radius: float = LIGHT_RADIUS, intensity=(1.0, 1.0, 1.0)) -> list[PointLight]:
    """Lights at the vertices of a named solid (or a 3x3 grid) at ``radius``.

    The tetrahedron has one vertex on the camera axis; the octahedron is
    turned so that a face looks at the camera, which puts three lights in
    front of the sphere and three behind it.  The grid lies in the plane
    ``z = radius`` with spacing ``radius / 2``.
    """
    if name == "tetrahedron":
        dirs = [(0.0, 0.0, 1.0)]
        r = math.sqrt(8.0 / 9.0)
        dirs += [(r * math.cos(t), r * math.sin(t), -1.0 / 3.0) for t in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]
    elif name == "octahedron":
        rot = _rotation_to_z((1.0, 1.0, 1.0))
        axes = np.vstack([np.eye(3), -np.eye(3)])
        dirs = [tuple(rot @ a) for a in axes]
    elif name == "grid3x3":
        step = radius / 2.0
        return [
            PointLight((i * step, j * step, radius), intensity)
            for j in (1, 0, -1)
            for i in (-1, 0, 1)
        ]
    else:
        raise UnknownPreset(f"unknown light preset {name!r}; choose from {', '.join(PRESETS)}")
    return [PointLight(tuple(radius * np.asarray(d)), intensity) for d in dirs]


def sphere_geometry(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Coverage mask ``(H, W)`` and unit normals ``(H, W, 3)`` at pixel centres."""
    centers = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    x = centers[None, :].repeat(size, axis=0)
    y = -centers[:, None].repeat(size, axis=1)
    rho2 = x * x + y * y
    mask = rho2 <= 1.0
    z = np.sqrt(np.clip(1.0 - rho2, 0.0, None))
    normals = np.stack([x, y, z], axis=-1)
    normals[~mask] = 0.0
    return mask, normals


def diffuse_terms(lights: Sequence[PointLight], points: np.ndarray) -> np.ndarray:
    """``max(n . l_i, 0)`` for surface points of the unit sphere (normal == point).

    ``points`` has shape ``(..., 3)``; the result has shape ``(L, ...)``.
    """
    out = []
    for light in lights:
        to_light = np.asarray(light.position) - points
        dist = np.linalg.norm(to_light, axis=-1)
        cos = np.einsum("...k,...k->...", points, to_light) / dist
        out.append(np.maximum(cos, 0.0))
    return np.stack(out)


def combine_terms(terms: np.ndarray, weights, p, eps: float | None = None) -> np.ndarray:
    """Projected H_p of nonnegative real terms stacked on axis 0.

    Symbolic limits use ``max(w * d) / max(w)`` and ``min(w * d) / max(w)``.
    """
    p = Exponent.parse(p)
    weights = np.asarray(weights, dtype=float).reshape((-1,) + (1,) * (terms.ndim - 1))
    if p.kind is ExponentKind.FINITE:
        amp, _ = power_mean_planes(terms, weights, p.value, eps=eps)
        return amp
    if p.kind is ExponentKind.POS_INF:
        return (weights * terms).max(axis=0) / weights.max()
    if p.kind is ExponentKind.NEG_INF:
        return (weights * terms).min(axis=0) / weights.max()
    raise UnsupportedExponent("shading takes a finite nonzero p or +/-inf")


def shade_diffuse(scene: Scene, p) -> PhasedImage:
    """Render the sphere; background pixels are 0."""
    mask, normals = sphere_geometry(scene.size)
    d = diffuse_terms(scene.lights, normals[mask])  # (L, M)
    intensity = np.array([light.intensity for light in scene.lights])  # (L, K)
    terms = d[:, :, None] * intensity[:, None, :]  # (L, M, K)
    weights = scene.weights if scene.weights is not None else np.ones(len(scene.lights))
    eps = scene.eps if scene.eps_lift else None
    shade = combine_terms(terms, weights, p, eps=eps)
    out = np.zeros((scene.size, scene.size, scene.channels))
    out[mask] = shade
    return PhasedImage(out)


def great_circle(samples: int = 512) -> tuple[np.ndarray, np.ndarray]:
    """Angles in [-pi, pi) and points on the sphere's y = 0 great circle."""
    angles = -math.pi + 2.0 * math.pi * np.arange(samples) / samples
    points = np.stack([np.sin(angles), np.zeros(samples), np.cos(angles)], axis=-1)
    return angles, points


def profile_lights(radius: float = LIGHT_RADIUS) -> list[PointLight]:
    """Two lights in the y = 0 plane, 60 degrees apart; used for terminator profiles."""
    return [
        PointLight((radius * math.sin(a), 0.0, radius * math.cos(a)), (1.0,))
        for a in (0.0, math.pi / 3)
    ]


def terminator_profile(lights: Sequence[PointLight], p, samples: int = 512,
                       eps: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Shade of the first channel along the y = 0 great circle."""
    angles, points = great_circle(samples)
    intensity = np.array([light.intensity[0] for light in lights])
    terms = diffuse_terms(lights, points) * intensity[:, None]
    return angles, combine_terms(terms, np.ones(len(lights)), p, eps=eps)


def terminator_indices(lights: Sequence[PointLight], samples: int = 512, light: int = 0) -> list[int]:
    """Sample indices where ``light``'s diffuse term switches on/off while another is lit."""
    _, points = great_circle(samples)
    d = diffuse_terms(lights, points)
    own = d[light] > 0
    others = np.delete(d, light, axis=0).max(axis=0) > 0 if len(lights) > 1 else np.ones(samples, bool)
    k = np.arange(samples - 1)
    switch = own[k] != own[k + 1]
    return [int(i) for i in k[switch & others[k] & others[k + 1]]]


def max_second_difference(values: np.ndarray, centers: Sequence[int], window: int = 8) -> float:
    worst = 0.0
    for c in centers:
        lo, hi = max(c - window, 1), min(c + window, len(values) - 2)
        k = np.arange(lo, hi + 1)
        worst = max(worst, float(np.abs(values[k + 1] - 2 * values[k] + values[k - 1]).max()))
    return worst


def half_lambert(cos_theta: float) -> float:
    """``(cos theta + 1) / 2``."""
    return (cos_theta + 1.0) / 2.0


def max_approx(cos_theta, p: float):
    """Smooth stand-in for ``max(cos theta, 0)`` that tends to it as ``p -> inf``.

    ``(((cos + 1)^p + 1)^(1/p) - 1) / ((2^p + 1)^(1/p) - 1)``
    """
    if p < 1:
        raise ValueError("max_approx needs p >= 1")
    c = np.asarray(cos_theta, dtype=float)
    num = ((c + 1.0) ** p + 1.0) ** (1.0 / p) - 1.0
    den = (2.0**p + 1.0) ** (1.0 / p) - 1.0
    out = num / den
    return float(out) if out.ndim == 0 else out


def shadow_ramp(signed_distance, width: float):
    """Linear opacity ramp across a shadow boundary, 0.5 at the boundary.

    A simple stand-in for a soft shadow edge; negative distances lie inside
    the caster.
    """
    if width <= 0:
        raise ValueError("ramp width must be positive")
    out = np.clip(0.5 - np.asarray(signed_distance, dtype=float) / width, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


# -- config ----------------------------------------------------------------------

_TRUE = {"1", "true", "yes", "on"}


def parse_scene_config(text: str) -> tuple[Scene, Exponent | None]:
    """Parse ``key=value`` lines into a scene and an optional exponent.

    Keys: ``size`` (or ``resolution``), ``preset``, ``radius``, ``p``,
    ``eps_lift``, ``eps``, ``intensity`` (one triplet for all lights),
    ``light`` (repeatable ``x,y,z[;r,g,b]``), ``weights`` (comma list).
    """
    opts: dict = {}
    lights: list[PointLight] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {raw!r}")
        key, value = key.strip().lower(), value.strip()
        if key == "light":
            pos, _, inten = value.partition(";")
            position = [float(v) for v in pos.split(",")]
            intensity = [float(v) for v in inten.split(",")] if inten else [1.0, 1.0, 1.0]
            lights.append(PointLight(position, intensity))
        else:
            opts[key] = value
    radius = float(opts.get("radius", LIGHT_RADIUS))
    intensity = tuple(float(v) for v in opts["intensity"].split(",")) if "intensity" in opts else (1.0, 1.0, 1.0)
    if "preset" in opts:
        lights = light_preset(opts["preset"], radius, intensity) + lights
    weights = tuple(float(v) for v in opts["weights"].split(",")) if "weights" in opts else None
    scene = Scene(
        lights=lights,
        size=int(opts.get("size", opts.get("resolution", 256))),
        weights=weights,
        eps_lift=opts.get("eps_lift", "false").lower() in _TRUE,
        eps=float(opts.get("eps", DEFAULT_EPS)),
    )
    p = Exponent.parse(opts["p"]) if "p" in opts else None
    return scene, p


def load_scene_config(path) -> tuple[Scene, Exponent | None]:
    with open(path) as f:
        return parse_scene_config(f.read())


def with_size(scene: Scene, size: int) -> Scene:
    return replace(scene, size=size)
