"""Phase-aware image combination.

Layers carry premultiplied color (``alpha * x``) as a :class:`PhasedImage`
plus an alpha plane.  ``over`` is the associative, non-commutative
reference; ``generalized_composite`` blends ``alpha1 * F + (1 - alpha1) * bg``
for a choice of ``F``, including the commutative projected ``H_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    HMElement,
    PhasedComplex,
    ZERO,
    as_phased,
    hm_combine,
    power_mean_planes,
)
from .errors import DimensionMismatch, DomainError, InvalidMatrix, NotAVector
from .imageio import PhasedImage

COMPOSITE_OPS = ("add", "mul", "max", "min", "hm")


@dataclass(frozen=True, eq=False)
class Layer:
    """Premultiplied color and its coverage (``alpha`` is ``(H, W)`` in [0, 1])."""

    color: PhasedImage
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        if alpha.ndim == 3 and alpha.shape[2] == 1:
            alpha = alpha[:, :, 0]
        if alpha.shape != self.color.shape[:2]:
            raise DimensionMismatch(f"alpha {alpha.shape} does not match image {self.color.shape[:2]}")
        if np.any(alpha < 0) or np.any(alpha > 1):
            raise ValueError("alpha must lie in [0, 1]")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def opaque(cls, color: PhasedImage) -> "Layer":
        return cls(color, np.ones(color.shape[:2]))

    @classmethod
    def from_straight(cls, color: PhasedImage, alpha) -> "Layer":
        alpha = np.asarray(alpha, dtype=float)
        a3 = alpha if alpha.ndim == 3 else alpha[:, :, None]
        return cls(PhasedImage(color.amplitude * a3, color.phase), alpha)

    def straight(self) -> np.ndarray:
        """Un-premultiplied complex color (0 where alpha is 0)."""
        a = self.alpha[:, :, None]
        premul = self.color.to_complex()
        safe = np.where(a > 0, a, 1.0)
        return np.where(a > 0, premul / safe, 0.0)


def _complex(img: PhasedImage) -> np.ndarray:
    if not img.has_phase():
        return img.amplitude.astype(complex)
    return img.to_complex()


def _from_complex(values: np.ndarray) -> PhasedImage:
    if not np.any(values.imag):
        real = values.real
        # negative reals become phase pi
        return PhasedImage(np.abs(real), np.where(real < 0, math.pi, 0.0))
    return PhasedImage.from_complex(values)


def _same_shape(*images: PhasedImage) -> None:
    if len({img.shape for img in images}) != 1:
        raise DimensionMismatch("images must have identical dimensions and channel counts")


def over(fg: Layer, bg: Layer) -> Layer:
    """Premultiplied over: ``C = C1 + (1 - a1) C0``, ``a = a1 + (1 - a1) a0``."""
    _same_shape(fg.color, bg.color)
    keep = 1.0 - fg.alpha
    color = _complex(fg.color) + keep[:, :, None] * _complex(bg.color)
    return Layer(_from_complex(color), fg.alpha + keep * bg.alpha)


def add_phase_composite(img0: PhasedImage, img1: PhasedImage, weight: float = 0.5) -> PhasedImage:
    """``weight * (r0 e^{i theta0} + r1 e^{i theta1})`` per pixel."""
    _same_shape(img0, img1)
    return _from_complex(weight * (_complex(img0) + _complex(img1)))


def add_phase_sum(images: Sequence[PhasedImage], weight: float = 1.0) -> PhasedImage:
    """n-ary form of :func:`add_phase_composite`."""
    images = list(images)
    _same_shape(*images)
    total = sum((_complex(img) for img in images[1:]), _complex(images[0]))
    return _from_complex(weight * total)


def _blend(op: str, x1: np.ndarray, x0: np.ndarray, w1, w0, p: float | None, eps) -> np.ndarray:
    if op == "add":
        return x1 + x0
    if op == "mul":
        return x1 * x0
    if op in ("max", "min"):
        if np.any(x1.imag) or np.any(x0.imag) or np.any(x1.real < 0) or np.any(x0.real < 0):
            raise DomainError(f"{op} compositing needs nonnegative zero-phase inputs")
        return (np.maximum if op == "max" else np.minimum)(x1.real, x0.real).astype(complex)
    if op == "hm":
        if p is None:
            raise ValueError("hm compositing needs an exponent p")
        amps = np.stack([np.abs(x1), np.abs(x0)])
        phases = np.stack([np.angle(x1), np.angle(x0)])
        weights = np.stack(np.broadcast_arrays(w1, w0))
        # a pixel with both weights zero falls back to equal weights
        both_zero = np.all(weights == 0, axis=0)
        weights = np.where(both_zero, 1.0, weights)
        amp, phase = power_mean_planes(amps, weights, p, phases=phases, eps=eps)
        return amp * np.exp(1j * phase)
    raise ValueError(f"unknown compositing function {op!r}; expected one of {COMPOSITE_OPS}")


def generalized_composite(op: str, fg: Layer, bg: Layer, p: float | None = None,
                          weights="alpha", eps: float | None = 1e-6) -> Layer:
    """``alpha x = a1 F(x1, x0) + (1 - a1) a0 x0`` with ``a = a1 + (1 - a1) a0``.

    ``F`` acts on straight (un-premultiplied) colors.  For ``op="hm"``, F is
    the projection of ``H_p`` of the two colors; ``weights`` selects the
    projective weights: ``"alpha"`` (shared alpha per layer, the default),
    ``"equal"``, or a pair of ``(H, W)``/``(H, W, K)`` arrays giving
    per-channel weight planes.
    """
    _same_shape(fg.color, bg.color)
    x1, x0 = fg.straight(), bg.straight()
    if isinstance(weights, str):
        if weights == "alpha":
            w1, w0 = fg.alpha[:, :, None], bg.alpha[:, :, None]
        elif weights == "equal":
            w1 = w0 = np.ones(fg.alpha.shape)[:, :, None]
        else:
            raise ValueError(f"unknown weight mode {weights!r}")
    else:
        w1, w0 = (np.asarray(w, dtype=float) for w in weights)
        w1 = w1 if w1.ndim == 3 else w1[:, :, None]
        w0 = w0 if w0.ndim == 3 else w0[:, :, None]
    blended = _blend(op, x1, x0, w1, w0, p, eps)
    keep = 1.0 - fg.alpha
    color = fg.alpha[:, :, None] * blended + keep[:, :, None] * _complex(bg.color)
    return Layer(_from_complex(color), fg.alpha + keep * bg.alpha)


# -- material matrices ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MaterialMatrix:
    """Complex channel-coupling matrix acting on Vector pixels under H_1.

    ``entries[u, v]`` moves channel ``v`` into channel ``u``.  With
    ``projective=True`` the matrix has one extra row/column for the alpha
    term, and the first K entries of its last row must be zero.
    """

    entries: np.ndarray
    projective: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidMatrix(f"material matrix must be square, got {m.shape}")
        if self.projective and np.any(m[-1, :-1] != 0):
            raise InvalidMatrix("the last row of a projective material matrix must be zero except its diagonal")
        object.__setattr__(self, "entries", m)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: "MaterialMatrix") -> "MaterialMatrix":
        """``self @ other`` applies ``other`` first."""
        return MaterialMatrix(self.entries @ other.entries, self.projective and other.projective)

    @classmethod
    def identity(cls, k: int = 3) -> "MaterialMatrix":
        return cls(np.eye(k))


def apply_material_matrix(matrix: MaterialMatrix, pixel: Sequence[HMElement]) -> list[HMElement]:
    """``x'_u = sum_v b_uv x_v`` on Vector coefficients (defined for p = 1 only).

    For a projective matrix the last pixel entry is the alpha term, passed
    as a Vector ``(alpha, 0)`` as well.
    """
    pixel = list(pixel)
    if len(pixel) != matrix.size:
        raise DimensionMismatch(f"matrix of size {matrix.size} applied to {len(pixel)} channels")
    for v in pixel:
        if v.a.amplitude != 0.0:
            raise NotAVector("material matrices act on Vector elements (a = 0) only")
    coeffs = np.array([v.x.to_complex() for v in pixel])
    out = matrix.entries @ coeffs
    return [HMElement(as_phased(complex(c)), ZERO) for c in out]


def parse_material_matrix(text: str) -> MaterialMatrix:
    """First line ``K``; then K rows (or K+1 for the projective form) of ``re,im`` pairs."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 1:
        raise InvalidMatrix("matrix file must start with the channel count K")
    k = int(lines[0][0])
    rows = [[_parse_entry(tok) for tok in row] for row in lines[1:]]
    size = len(rows)
    if size not in (k, k + 1) or any(len(r) != size for r in rows):
        raise InvalidMatrix(f"expected {k} rows of {k} entries, or {k + 1} rows of {k + 1}")
    return MaterialMatrix(np.array(rows), projective=size == k + 1)


def _parse_entry(token: str) -> complex:
    parts = token.split(",")
    if len(parts) != 2:
        raise InvalidMatrix(f"matrix entries are 're,im' pairs, got {token!r}")
    return complex(float(parts[0]), float(parts[1]))


def attenuate(light: HMElement, a_term) -> HMElement:
    """H_1 of the light vector ``(c, 0)`` with the material ``(0, a_term)``."""
    if light.a.amplitude != 0.0:
        raise NotAVector("attenuate expects a light Vector (a = 0)")
    a_term = as_phased(a_term)
    return hm_combine(1.0, light, HMElement(ZERO, a_term))


def inverse_square(light: HMElement, distance: float) -> HMElement:
    return attenuate(light, PhasedComplex(distance * distance))

