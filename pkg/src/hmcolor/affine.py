"""The p = 1 (addition) algebra on projective space with real weights.

Summation of weighted points projects to their weighted average; signed
weights extrapolate along the line through two points.  The light-fitting
solvers recover classical polynomial coefficients (which may be negative)
from colors observed under Boolean light states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import HMElement, weighted_point
from .errors import DegenerateWeight, DimensionMismatch

DEGENERATE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AffinePoint:
    value: np.ndarray
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "value", np.atleast_1d(np.asarray(self.value, dtype=float)))
        object.__setattr__(self, "weight", float(self.weight))

    def homogeneous(self) -> tuple[np.ndarray, float]:
        return self.weight * self.value, self.weight

    def to_elements(self) -> list[HMElement]:
        return [weighted_point(v, self.weight) for v in self.value]


def homogeneous_sum(pairs: Sequence[tuple]) -> tuple[np.ndarray, float]:
    """Component-wise sum of ``(w*x, w)`` pairs."""
    xs = np.sum([np.asarray(x, dtype=float) for x, _ in pairs], axis=0)
    return xs, float(sum(w for _, w in pairs))


def sum_project(points: Sequence[AffinePoint]) -> np.ndarray:
    points = list(points)
    if not points:
        raise DegenerateWeight("no points to sum")
    weights = np.array([pt.weight for pt in points])
    total = weights.sum()
    if abs(total) < DEGENERATE_TOLERANCE:
        raise DegenerateWeight(f"weights sum to {total}; the sum is a vector")
    values = np.stack([pt.value for pt in points])
    return (weights[:, None] * values).sum(axis=0) / total


def partition_weights(weights: Sequence[float]) -> np.ndarray:
    """The barycentric coefficients ``w_i / sum(w)`` implied by a sum of points."""
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if abs(total) < DEGENERATE_TOLERANCE:
        raise DegenerateWeight(f"weights sum to {total}")
    return weights / total


def line_point(x0, x1, s1: float) -> np.ndarray:
    """Projection of ``(x0, 1) + s1 * (x1, 1)``: ``x0 + s1/(1+s1) * (x1 - x0)``."""
    if abs(1.0 + s1) < DEGENERATE_TOLERANCE:
        raise DegenerateWeight("s1 = -1 sends the point to infinity")
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    return x0 + s1 / (1.0 + s1) * (x1 - x0)


def _vectors(*colors):
    arrays = [np.atleast_1d(np.asarray(c, dtype=float)) for c in colors]
    if len({a.shape for a in arrays}) != 1:
        raise DimensionMismatch("all colors must have the same number of channels")
    return arrays


def solve_linear_light(c0, c1) -> tuple[np.ndarray, np.ndarray]:
    """Fit ``c = a + t*b`` to the colors at ``t = 0`` and ``t = 1``."""
    c0, c1 = _vectors(c0, c1)
    return c0.copy(), c1 - c0


@dataclass(frozen=True)
class BilinearModel:
    """``c00 + t1*dt1 + t0*dt0 + t0*t1*dt0t1``."""

    c00: np.ndarray
    dt1: np.ndarray
    dt0: np.ndarray
    dt0t1: np.ndarray

    def __call__(self, t0: float, t1: float) -> np.ndarray:
        return eval_bilinear(self, t0, t1)


def solve_bilinear_lights(c00, c01, c10, c11) -> BilinearModel:
    """Classical polynomial coefficients of the bilinear patch through four corner colors.

    ``cXY`` is the color observed with light 0 in state X and light 1 in state Y.
    """
    c00, c01, c10, c11 = _vectors(c00, c01, c10, c11)
    return BilinearModel(
        c00=c00.copy(),
        dt1=c01 - c00,
        dt0=c10 - c00,
        dt0t1=c11 - c10 - c01 + c00,
    )


def eval_bilinear(model: BilinearModel, t0: float, t1: float) -> np.ndarray:
    return model.c00 + t1 * model.dt1 + t0 * model.dt0 + (t0 * t1) * model.dt0t1


def eval_bilinear_barycentric(c00, c01, c10, c11, t0: float, t1: float) -> np.ndarray:
    """The same patch in interpolating form; all coefficients nonnegative on [0, 1]^2."""
    c00, c01, c10, c11 = _vectors(c00, c01, c10, c11)
    return (
        (1 - t0) * (1 - t1) * c00
        + (1 - t0) * t1 * c01
        + t0 * (1 - t1) * c10
        + t0 * t1 * c11
    )
