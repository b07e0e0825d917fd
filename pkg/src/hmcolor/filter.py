"""Generalised H_p convolution filters and their morphological limits.

For a kernel ``w`` of size ``(2n+1) x (2m+1)``::

    c'(y, x) = (sum w_ij^p * c(y+i-n, x+j-m)^p / sum w_ij^p) ** (1/p)

``p = 1`` is ordinary normalised convolution, ``p -> +inf`` dilation and
``p -> -inf`` erosion.  Kernel rows run along image rows.  Borders are
sampled clamp-to-edge, zero-weight taps are skipped, and for ``p < 0``
amplitudes below ``eps`` are lifted to ``eps`` to avoid poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Exponent, ExponentKind
from .errors import DomainError, UnsupportedExponent
from .imageio import PhasedImage

DEFAULT_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class Kernel:
    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weights, dtype=float))
        if w.ndim != 2 or w.shape[0] % 2 == 0 or w.shape[1] % 2 == 0:
            raise ValueError(f"kernel must be (2n+1) x (2m+1), got shape {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("kernel weights must be finite and nonnegative")
        if w.sum() <= 0:
            raise ValueError("kernel needs at least one positive weight")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0] // 2

    @property
    def m(self) -> int:
        return self.weights.shape[1] // 2

    def taps(self):
        """Positive-weight taps ``(di, dj, w)`` in row-major order."""
        for i in range(self.weights.shape[0]):
            for j in range(self.weights.shape[1]):
                w = self.weights[i, j]
                if w > 0:
                    yield i - self.n, j - self.m, w


def box_kernel(n: int, m: int | None = None) -> Kernel:
    m = n if m is None else m
    if n < 0 or m < 0:
        raise ValueError("kernel half-extents must be nonnegative")
    return Kernel(np.ones((2 * n + 1, 2 * m + 1)))


def parse_kernel(text: str) -> Kernel:
    """Parse ``n m`` followed by ``2n+1`` rows of ``2m+1`` weights."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise ValueError("kernel file must start with a line 'n m'")
    n, m = int(lines[0][0]), int(lines[0][1])
    rows = [[float(v) for v in row] for row in lines[1:]]
    if len(rows) != 2 * n + 1 or any(len(r) != 2 * m + 1 for r in rows):
        raise ValueError(f"expected {2 * n + 1} rows of {2 * m + 1} weights")
    return Kernel(np.array(rows))


def format_kernel(kernel: Kernel) -> str:
    rows = [" ".join(f"{w:g}" for w in row) for row in kernel.weights]
    return "\n".join([f"{kernel.n} {kernel.m}", *rows]) + "\n"


def load_kernel(spec: str) -> Kernel:
    """``box:N`` or a path to a kernel text file."""
    if spec.startswith("box:"):
        return box_kernel(int(spec[4:]))
    with open(spec) as f:
        return parse_kernel(f.read())


def _shifted(padded: np.ndarray, di: int, dj: int, n: int, m: int, h: int, w: int) -> np.ndarray:
    return padded[n + di : n + di + h, m + dj : m + dj + w]


def _pad(plane: np.ndarray, n: int, m: int) -> np.ndarray:
    return np.pad(plane, ((n, n), (m, m), (0, 0)), mode="edge")


def hm_filter(img: PhasedImage, kernel: Kernel, p, eps: float | None = DEFAULT_EPS) -> PhasedImage:
    """Apply the H_p filter; phases enter as ``p * phase`` and leave principal-valued."""
    p = float(p.value if isinstance(p, Exponent) and p.is_finite else p)
    if p == 0.0 or not math.isfinite(p):
        raise UnsupportedExponent(f"hm_filter needs a finite nonzero p, got {p}")
    h, w, _ = img.shape
    n, m = kernel.n, kernel.m
    amp = img.amplitude
    if p < 0:
        if eps is not None:
            amp = np.maximum(amp, eps)
        elif np.any(amp == 0):
            raise DomainError("zero amplitude under p < 0; pass eps to lift it")
    powered = _pad(amp, n, m) ** p
    phased = img.has_phase()
    if phased:
        powered = powered * np.exp(1j * p * _pad(img.phase, n, m))
    total = np.zeros((h, w, img.channels), dtype=powered.dtype)
    norm = 0.0
    for di, dj, wt in kernel.taps():
        wp = wt ** p
        total += wp * _shifted(powered, di, dj, n, m, h, w)
        norm += wp
    ratio = total / norm
    if not phased:
        return PhasedImage(ratio ** (1.0 / p))
    magnitude = np.abs(ratio)
    zero = magnitude == 0
    with np.errstate(divide="ignore"):
        out_amp = np.where(zero, 0.0, magnitude ** (1.0 / p))
    return PhasedImage(out_amp, np.where(zero, 0.0, np.angle(ratio) / p))


def _morph(img: PhasedImage, kernel: Kernel, better) -> PhasedImage:
    h, w, _ = img.shape
    n, m = kernel.n, kernel.m
    amp = _pad(img.amplitude, n, m)
    phase = _pad(img.phase, n, m)
    best = best_phase = None
    for di, dj, wt in kernel.taps():
        cand = wt * _shifted(amp, di, dj, n, m, h, w)
        cand_phase = _shifted(phase, di, dj, n, m, h, w)
        if best is None:
            best, best_phase = cand.copy(), cand_phase.copy()
            continue
        # strict comparison: the first tap in row-major order wins ties
        take = better(cand, best)
        best[take] = cand[take]
        best_phase[take] = cand_phase[take]
    return PhasedImage(best / kernel.weights.max(), best_phase)


def dilate(img: PhasedImage, kernel: Kernel) -> PhasedImage:
    """``max(w * c) / max(w)`` over positive-weight taps (amplitude only)."""
    return _morph(img, kernel, np.greater)


def erode(img: PhasedImage, kernel: Kernel) -> PhasedImage:
    """``min(w * c) / max(w)`` over positive-weight taps (amplitude only)."""
    return _morph(img, kernel, np.less)


def apply_stage(img: PhasedImage, kernel: Kernel, p, eps: float | None = DEFAULT_EPS) -> PhasedImage:
    p = Exponent.parse(p)
    if p.kind is ExponentKind.FINITE:
        return hm_filter(img, kernel, p.value, eps=eps)
    if p.kind is ExponentKind.POS_INF:
        return dilate(img, kernel)
    if p.kind is ExponentKind.NEG_INF:
        return erode(img, kernel)
    raise UnsupportedExponent(
        "the geometric-mean limit is not a filter stage: H_p excludes p = 0 and its limit "
        "ignores the kernel weights; use a small nonzero p instead"
    )


def pipeline(img: PhasedImage, stages: Sequence[tuple], eps: float | None = DEFAULT_EPS) -> PhasedImage:
    """Apply ``(kernel, p)`` stages left to right."""
    for kernel, p in stages:
        img = apply_stage(img, kernel, p, eps=eps)
    return img


def disk_image(size: int = 256, radius: float | None = None, fg=(0.9, 0.75, 0.2), bg=(0.1, 0.15, 0.4)) -> PhasedImage:
    """Aliased (binary coverage) disk centred in a square image."""
    radius = size * 0.35 if radius is None else radius
    c = (size - 1) / 2.0
    y, x = np.mgrid[0:size, 0:size]
    inside = (x - c) ** 2 + (y - c) ** 2 <= radius ** 2
    fg = np.asarray(fg, dtype=float)
    bg = np.asarray(bg, dtype=float)
    return PhasedImage(np.where(inside[:, :, None], fg, bg))
