"""Hölder-Minkowski color algebra on phase-tracked complex scalars.

Scalars are stored in polar form with an *unbounded* phase so that
``(z ** p) ** (1 / p) == z`` holds for every nonzero ``z``.  Elements are
projective pairs ``(x, a)`` per channel; ``x`` already carries any weight
(``weighted_point(value, weight)`` builds ``(weight * value, weight)``).

The combination ``H_p`` is realised as accumulate-then-extract::

    acc = acc_new(p)
    acc = acc_add(acc, v0)
    acc = acc_add(acc, v1)
    acc_extract(acc)   # == hm_combine(p, v0, v1)

so the binary and n-ary forms cannot disagree and partial sums may be
merged in any grouping.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DomainError,
    MismatchedExponent,
    UnsupportedExponent,
    VectorHasNoProjection,
)

__all__ = [
    "PhasedComplex",
    "HMElement",
    "ElementKind",
    "Exponent",
    "ExponentKind",
    "GEOMETRIC",
    "POS_INFINITY",
    "NEG_INFINITY",
    "HMAccumulator",
    "Color",
    "ZERO",
    "IDENTITY",
    "as_phased",
    "pc_from_cartesian",
    "pc_pow",
    "pc_mul",
    "pc_div",
    "weighted_point",
    "hm_scalar_mul",
    "acc_new",
    "acc_add",
    "acc_merge",
    "acc_extract",
    "hm_combine",
    "hm_nary",
    "project",
    "hm_inverse",
    "geometric_mean",
    "hm_max",
    "hm_min",
    "hm_mean",
    "classical_check",
    "combine_colors",
    "power_mean_planes",
]

_EPS = np.finfo(float).eps
_HALF_PI = math.pi / 2
_AXES = (1 + 0j, 1j, -1 + 0j, -1j)


def _rect(r: float, theta: float) -> complex:
    if theta == 0.0:
        return complex(r, 0.0)
    # quarter turns map to exact axis values so that e.g. 1 + e^{i*pi} == 0
    k = round(theta / _HALF_PI)
    if math.isfinite(r) and abs(theta - k * _HALF_PI) <= 8 * _EPS * max(1.0, abs(theta)):
        return r * _AXES[k % 4]
    return cmath.rect(r, theta)


class PhasedComplex:
    """Complex scalar ``amplitude * exp(i * phase)`` with an unbounded phase.

    Instances are immutable.  A value produced by :func:`pc_pow` remembers
    the scalar and exponent it was generated from, so chained powers compose
    on the exponent (``pc_pow(pc_pow(z, q), 1 / q)`` returns ``z`` itself).
    Values built by :func:`pc_from_cartesian` keep their exact Cartesian form.
    """

    __slots__ = ("amplitude", "phase", "_base", "_exponent", "_cartesian")

    def __init__(self, amplitude: float = 0.0, phase: float = 0.0):
        amplitude = float(amplitude)
        if amplitude < 0 or math.isnan(amplitude):
            raise DomainError(f"amplitude must be nonnegative, got {amplitude}")
        self.amplitude = amplitude
        self.phase = float(phase) + 0.0 if amplitude != 0.0 else 0.0
        self._base = None
        self._exponent = None
        self._cartesian = None

    @classmethod
    def _raw(cls, amplitude, phase, base=None, exponent=None, cartesian=None):
        # unchecked constructor for the hot paths; amplitude must be > 0
        z = object.__new__(cls)
        z.amplitude = amplitude
        z.phase = phase + 0.0
        z._base = base
        z._exponent = exponent
        z._cartesian = cartesian
        return z

    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    def to_complex(self) -> complex:
        if self._cartesian is not None:
            return self._cartesian
        return _rect(self.amplitude, self.phase)

    def principal(self) -> "PhasedComplex":
        """Same complex number with the phase reduced to (-pi, pi]."""
        if self.amplitude == 0.0:
            return self
        phase = math.remainder(self.phase, 2 * math.pi)
        if phase == -math.pi:
            phase = math.pi
        return PhasedComplex(self.amplitude, phase)

    def __eq__(self, other):
        if not isinstance(other, PhasedComplex):
            return NotImplemented
        return self.amplitude == other.amplitude and self.phase == other.phase

    def __hash__(self):
        return hash((self.amplitude, self.phase))

    def __repr__(self):
        return f"PhasedComplex(amplitude={self.amplitude!r}, phase={self.phase!r})"

    def __iter__(self):
        yield self.amplitude
        yield self.phase

    def __pow__(self, q):
        return pc_pow(self, q)

    def __mul__(self, other):
        return pc_mul(self, as_phased(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return pc_div(self, as_phased(other))

    def __complex__(self):
        return self.to_complex()


ZERO = PhasedComplex(0.0, 0.0)


def pc_from_cartesian(re, im: float = 0.0) -> PhasedComplex:
    """Polar form of ``re + i*im`` with the principal phase in (-pi, pi]."""
    if isinstance(re, complex):
        re, im = re.real, re.imag
    re = float(re)
    im = float(im) + 0.0  # drop a negative zero so that -1 maps to +pi
    amplitude = math.hypot(re, im)
    if amplitude == 0.0:
        return ZERO
    return PhasedComplex._raw(amplitude, math.atan2(im, re), cartesian=complex(re, im))


def as_phased(value) -> PhasedComplex:
    """Coerce a real, complex or :class:`PhasedComplex` into a PhasedComplex."""
    if isinstance(value, PhasedComplex):
        return value
    if isinstance(value, (complex, np.complexfloating)):
        return pc_from_cartesian(complex(value))
    value = float(value)
    if value < 0:
        return PhasedComplex(-value, math.pi)
    return PhasedComplex(value, 0.0)


def pc_pow(z: PhasedComplex, q: float) -> PhasedComplex:
    """``z ** q`` in general form: ``(amplitude ** q, q * phase)``."""
    q = float(q)
    if z.amplitude == 0.0:
        if q > 0:
            return ZERO
        raise DomainError(f"zero raised to nonpositive power {q}")
    if z._base is not None:
        exponent = z._exponent * q
        if abs(exponent - 1.0) <= 4 * _EPS:
            return z._base
        return pc_pow(z._base, exponent)
    try:
        amplitude = z.amplitude ** q
    except OverflowError:
        amplitude = math.inf
    if amplitude == 0.0:
        return ZERO
    return PhasedComplex._raw(amplitude, z.phase * q, z, q)


def pc_mul(z: PhasedComplex, w: PhasedComplex) -> PhasedComplex:
    amplitude = z.amplitude * w.amplitude
    if amplitude == 0.0:
        return ZERO
    return PhasedComplex._raw(amplitude, z.phase + w.phase)


def pc_div(z: PhasedComplex, w: PhasedComplex) -> PhasedComplex:
    if w.amplitude == 0.0:
        raise DomainError("division by zero")
    return PhasedComplex(z.amplitude / w.amplitude, z.phase - w.phase)


class ElementKind(enum.Enum):
    IDENTITY = "identity"
    VECTOR = "vector"
    MATERIAL = "material"
    POINT = "point"


class HMElement:
    """Projective pair ``(x, a)`` of phased scalars for one channel."""

    __slots__ = ("x", "a")

    def __init__(self, x=ZERO, a=ZERO):
        self.x = x if type(x) is PhasedComplex else as_phased(x)
        self.a = a if type(a) is PhasedComplex else as_phased(a)

    def classify(self) -> ElementKind:
        if self.x.amplitude == 0.0:
            return ElementKind.IDENTITY if self.a.amplitude == 0.0 else ElementKind.MATERIAL
        return ElementKind.VECTOR if self.a.amplitude == 0.0 else ElementKind.POINT

    def is_identity(self) -> bool:
        return self.x.amplitude == 0.0 and self.a.amplitude == 0.0

    def is_vector(self) -> bool:
        return self.a.amplitude == 0.0 and self.x.amplitude != 0.0

    def __eq__(self, other):
        if not isinstance(other, HMElement):
            return NotImplemented
        return self.x == other.x and self.a == other.a

    def __hash__(self):
        return hash((self.x, self.a))

    def __repr__(self):
        return (
            f"HMElement(x=({self.x.amplitude!r}, {self.x.phase!r}), "
            f"a=({self.a.amplitude!r}, {self.a.phase!r}))"
        )


IDENTITY = HMElement(ZERO, ZERO)


def weighted_point(value, weight) -> HMElement:
    """Point whose projection is ``value`` with projective weight ``weight``."""
    weight = as_phased(weight)
    return HMElement(pc_mul(as_phased(value), weight), weight)


def hm_scalar_mul(b, v: HMElement) -> HMElement:
    b = as_phased(b)
    return HMElement(pc_mul(b, v.x), pc_mul(b, v.a))


class ExponentKind(enum.Enum):
    FINITE = "finite"
    GEOMETRIC = "geo"
    POS_INF = "inf"
    NEG_INF = "-inf"


@dataclass(frozen=True)
class Exponent:
    """The parameter ``p``: a finite nonzero real or one of the symbolic limits."""

    kind: ExponentKind
    value: float | None = None

    @classmethod
    def finite(cls, p: float) -> "Exponent":
        p = float(p)
        if p == 0.0 or not math.isfinite(p):
            raise UnsupportedExponent(f"finite exponent must be nonzero and finite, got {p}")
        return cls(ExponentKind.FINITE, p)

    @classmethod
    def parse(cls, text) -> "Exponent":
        """Parse ``inf``, ``-inf``, ``geo`` or a nonzero decimal."""
        if isinstance(text, Exponent):
            return text
        token = str(text).strip().lower()
        if token in ("inf", "+inf", "infinity"):
            return POS_INFINITY
        if token in ("-inf", "-infinity"):
            return NEG_INFINITY
        if token in ("geo", "geometric"):
            return GEOMETRIC
        try:
            p = float(token)
        except ValueError:
            raise UnsupportedExponent(f"cannot parse exponent {text!r}") from None
        if p == 0.0:
            raise UnsupportedExponent(
                "p=0 is excluded from H_p; use 'geo' for the geometric-mean limit"
            )
        if math.isinf(p):
            return POS_INFINITY if p > 0 else NEG_INFINITY
        return cls.finite(p)

    @property
    def is_finite(self) -> bool:
        return self.kind is ExponentKind.FINITE

    def __str__(self):
        return f"{self.value:g}" if self.is_finite else self.kind.value


GEOMETRIC = Exponent(ExponentKind.GEOMETRIC)
POS_INFINITY = Exponent(ExponentKind.POS_INF)
NEG_INFINITY = Exponent(ExponentKind.NEG_INF)


def _finite_p(p) -> float:
    if type(p) is float and p != 0.0 and p - p == 0.0:
        return p
    if isinstance(p, Exponent):
        if not p.is_finite:
            raise UnsupportedExponent(f"H_p needs a finite exponent, got {p}")
        return p.value
    p = float(p)
    if p == 0.0 or not math.isfinite(p):
        raise UnsupportedExponent(f"H_p needs a finite nonzero exponent, got {p}")
    return p


def _power_term(z: PhasedComplex, p: float) -> complex:
    # cartesian form of pc_pow(z, p) without building the intermediate
    if z.amplitude == 0.0:
        if p > 0:
            return 0j
        raise DomainError(f"zero component raised to negative power {p}")
    if z._base is not None:
        exponent = z._exponent * p
        if abs(exponent - 1.0) <= 4 * _EPS:
            return z._base.to_complex()
        z, p = z._base, exponent
    try:
        amplitude = z.amplitude ** p
    except OverflowError:
        amplitude = math.inf
    return _rect(amplitude, z.phase * p)


class HMAccumulator:
    """Running sums ``X = sum x_i ** p`` and ``A = sum a_i ** p``.

    The identity element ``(0, 0)`` is neutral for every ``p`` and is
    skipped; any other exactly-zero component contributes 0 for ``p > 0``
    and is a pole for ``p < 0``.
    """

    __slots__ = ("p", "X", "A", "count", "_single")

    def __init__(self, p: float, X: complex = 0j, A: complex = 0j, count: int = 0, _single=None):
        self.p = p
        self.X = complex(X)
        self.A = complex(A)
        self.count = count
        # the sole term when count == 1; its extraction is exact
        self._single = _single

    def add(self, v: HMElement) -> "HMAccumulator":
        return acc_add(self, v)

    def merge(self, other: "HMAccumulator") -> "HMAccumulator":
        return acc_merge(self, other)

    def extract(self) -> HMElement:
        return acc_extract(self)

    def project(self) -> PhasedComplex:
        return project(acc_extract(self))

    def __repr__(self):
        return f"HMAccumulator(p={self.p!r}, X={self.X!r}, A={self.A!r}, count={self.count})"


def acc_new(p) -> HMAccumulator:
    return HMAccumulator(_finite_p(p))


def acc_add(acc: HMAccumulator, v: HMElement) -> HMAccumulator:
    if v.is_identity():
        return acc
    X = acc.X + _power_term(v.x, acc.p)
    A = acc.A + _power_term(v.a, acc.p)
    return HMAccumulator(acc.p, X, A, acc.count + 1, v if acc.count == 0 else None)


def acc_merge(left: HMAccumulator, right: HMAccumulator) -> HMAccumulator:
    if left.p != right.p:
        raise MismatchedExponent(f"cannot merge accumulators with p={left.p} and p={right.p}")
    if right.count == 0:
        return left
    if left.count == 0:
        return right
    return HMAccumulator(left.p, left.X + right.X, left.A + right.A, left.count + right.count)


def _root(total: complex, p: float) -> PhasedComplex:
    # pc_pow(pc_from_cartesian(total), 1 / p), inlined
    if total == 0:
        return ZERO
    amplitude = abs(total)
    base = PhasedComplex._raw(amplitude, math.atan2(total.imag + 0.0, total.real), cartesian=total)
    q = 1.0 / p
    try:
        root = amplitude ** q
    except OverflowError:
        root = math.inf
    if root == 0.0:
        return ZERO
    return PhasedComplex._raw(root, base.phase * q, base, q)


def acc_extract(acc: HMAccumulator) -> HMElement:
    """Apply the outer ``1/p`` root to both running sums."""
    if acc.count == 1 and acc._single is not None:
        return acc._single
    return HMElement(_root(acc.X, acc.p), _root(acc.A, acc.p))


def hm_combine(p, v0: HMElement, v1: HMElement) -> HMElement:
    # acc_extract(acc_add(acc_add(acc_new(p), v0), v1)) without the temporaries
    p = _finite_p(p)
    if v0.is_identity():
        return v1
    if v1.is_identity():
        return v0
    X = _power_term(v0.x, p) + _power_term(v1.x, p)
    A = _power_term(v0.a, p) + _power_term(v1.a, p)
    return HMElement(_root(X, p), _root(A, p))


def hm_nary(p, vs: Iterable[HMElement]) -> HMElement:
    acc = HMAccumulator(_finite_p(p))
    for v in vs:
        acc = acc_add(acc, v)
    return acc_extract(acc)


def project(v: HMElement) -> PhasedComplex:
    """The observable value ``x / a`` of a point."""
    x, a = v.x, v.a
    if a.amplitude == 0.0:
        raise VectorHasNoProjection("vectors (a = 0) have no projection")
    if x.amplitude == 0.0:
        return ZERO
    if x._base is not None and a._base is not None and x._exponent == a._exponent:
        # x = X^e and a = A^e, so x/a = (X/A)^e; avoids overflow of X^e for tiny p
        return pc_pow(pc_div(x._base, a._base), x._exponent)
    return pc_div(x, a)


def hm_inverse(v: HMElement, p: float, n: int = 0) -> HMElement:
    """Element that annihilates ``v`` under ``H_p``: both parts rotated by (2n+1)pi/p."""
    p = _finite_p(p)
    if n < 0 or int(n) != n:
        raise ValueError(f"branch index must be a nonnegative integer, got {n}")
    shift = (2 * int(n) + 1) * math.pi / p
    x = PhasedComplex(v.x.amplitude, v.x.phase + shift)
    a = PhasedComplex(v.a.amplitude, v.a.phase + shift)
    return HMElement(x, a)


def _nonnegative_reals(values, name) -> list[float]:
    out = []
    for value in values:
        if isinstance(value, PhasedComplex):
            if value.amplitude != 0.0 and math.remainder(value.phase, 2 * math.pi) != 0.0:
                raise DomainError(f"{name} must be nonnegative reals, got phase {value.phase}")
            value = value.amplitude
        elif isinstance(value, (complex, np.complexfloating)):
            if value.imag != 0:
                raise DomainError(f"{name} must be real, got {value}")
            value = value.real
        value = float(value)
        if value < 0 or math.isnan(value):
            raise DomainError(f"{name} must be nonnegative, got {value}")
        out.append(value)
    return out


def _check_weights(xs, weights):
    xs = list(xs)
    weights = list(weights)
    if not xs:
        raise DomainError("at least one value is required")
    if len(xs) != len(weights):
        raise DomainError(f"got {len(xs)} values but {len(weights)} weights")
    weights = _nonnegative_reals(weights, "weights")
    if any(w <= 0 for w in weights):
        raise DomainError("weights must be strictly positive")
    return xs, weights


def geometric_mean(xs: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted geometric mean ``prod x_i ** (w_i / sum w)``; weights are not powered."""
    xs, weights = _check_weights(xs, weights)
    xs = _nonnegative_reals(xs, "values")
    if any(x <= 0 for x in xs):
        raise DomainError("geometric mean needs strictly positive values")
    total = math.fsum(weights)
    return math.exp(math.fsum(w * math.log(x) for x, w in zip(xs, weights)) / total)


def hm_max(xs: Sequence[float], weights: Sequence[float]) -> float:
    """``max(w_i * x_i) / max(w_i)``."""
    xs, weights = _check_weights(xs, weights)
    xs = _nonnegative_reals(xs, "values")
    return max(w * x for x, w in zip(xs, weights)) / max(weights)


def hm_min(xs: Sequence[float], weights: Sequence[float]) -> float:
    """``min(w_i * x_i) / max(w_i)``."""
    xs, weights = _check_weights(xs, weights)
    xs = _nonnegative_reals(xs, "values")
    return min(w * x for x, w in zip(xs, weights)) / max(weights)


def hm_mean(p, xs: Sequence, weights: Sequence | None = None) -> PhasedComplex:
    """Projected combination of weighted values for any exponent, limits included.

    For finite ``p`` this is ``project(hm_nary(p, weighted points))``.  The
    geometric limit of ``H_p`` does not depend on the weights (they are raised
    to ``p -> 0``), so ``GEOMETRIC`` gives the equal-weight geometric mean.
    """
    xs = list(xs)
    if weights is None:
        weights = [1.0] * len(xs)
    p = Exponent.parse(p)
    if p.kind is ExponentKind.FINITE:
        return project(hm_nary(p.value, [weighted_point(x, w) for x, w in zip(xs, weights)]))
    if p.kind is ExponentKind.GEOMETRIC:
        return PhasedComplex(geometric_mean(xs, [1.0] * len(xs)))
    if p.kind is ExponentKind.POS_INF:
        return PhasedComplex(hm_max(xs, weights))
    return PhasedComplex(hm_min(xs, weights))


def classical_check(p: float, v0: HMElement, v1: HMElement) -> PhasedComplex:
    """Closed-form projection of ``H_1`` (weighted mean) or ``H_-1`` (harmonic form)."""
    if p not in (1, -1):
        raise UnsupportedExponent(f"closed forms exist for p = 1 and p = -1 only, got {p}")
    x0, a0, x1, a1 = _nonnegative_reals((v0.x, v0.a, v1.x, v1.a), "components")
    if p == 1:
        return PhasedComplex((x0 + x1) / (a0 + a1))
    # x_i holds a_i * value_i; (a0 + a1) * value0 * value1 / (a0 value0 + a1 value1)
    return PhasedComplex((a0 + a1) * (x0 / a0) * (x1 / a1) / (x0 + x1))


@dataclass(frozen=True)
class Color:
    """A K-channel color; ``frequencies`` are inert labels carried along."""

    channels: tuple
    frequencies: tuple = ("red", "green", "blue")

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise ValueError("a color needs at least one channel")
        if len(self.frequencies) != len(self.channels):
            object.__setattr__(
                self, "frequencies", tuple(f"c{i}" for i in range(len(self.channels)))
            )

    @classmethod
    def from_values(cls, values, weight=1.0) -> "Color":
        return cls(tuple(weighted_point(v, weight) for v in values))

    def __len__(self):
        return len(self.channels)

    def project(self) -> tuple:
        return tuple(project(c) for c in self.channels)

    def scale(self, b) -> "Color":
        return Color(tuple(hm_scalar_mul(b, c) for c in self.channels), self.frequencies)


def combine_colors(p, colors: Sequence[Color]) -> Color:
    """Channel-wise ``H_p`` of several colors with equal channel counts."""
    colors = list(colors)
    if not colors:
        raise ValueError("nothing to combine")
    k = len(colors[0])
    if any(len(c) != k for c in colors):
        raise ValueError("colors must have the same number of channels")
    channels = tuple(hm_nary(p, [c.channels[i] for c in colors]) for i in range(k))
    return Color(channels, colors[0].frequencies)


def power_mean_planes(amplitudes, weights, p, phases=None, eps=None):
    """Vectorised ``C(H_p)`` over the leading axis of stacked amplitude planes.

    Computes ``(sum w^p c^p / sum w^p) ** (1/p)`` in general form, with
    ``c = amplitude * exp(i * phase)``.  ``weights`` is either one weight per
    leading slice or an array broadcastable to ``amplitudes``.  Entries with
    zero weight do not take part.  With ``eps`` set and ``p < 0``, amplitudes
    below ``eps`` are lifted to ``eps``; otherwise a zero amplitude at
    ``p < 0`` raises :class:`DomainError`.

    Returns ``(amplitude, phase)`` arrays with the leading axis reduced.
    """
    p = _finite_p(p)
    amplitudes = np.asarray(amplitudes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if weights.ndim == 1 and amplitudes.ndim > 1:
        weights = weights.reshape((-1,) + (1,) * (amplitudes.ndim - 1))
    weights = np.broadcast_to(weights, amplitudes.shape)
    if np.any(weights < 0):
        raise DomainError("weights must be nonnegative")
    if np.any(amplitudes < 0):
        raise DomainError("amplitudes must be nonnegative")
    active = weights > 0
    if p < 0:
        if eps is not None:
            amplitudes = np.maximum(amplitudes, eps)
        elif np.any(active & (amplitudes == 0)):
            raise DomainError(f"zero amplitude raised to negative power {p}")
    with np.errstate(divide="ignore", over="ignore"):
        wp = np.where(active, np.where(active, weights, 1.0) ** p, 0.0)
        cp = np.where(active, amplitudes, 1.0) ** p
    denom = wp.sum(axis=0)
    if phases is None or not np.any(phases):
        ratio = (wp * cp).sum(axis=0) / denom
        return ratio ** (1.0 / p), np.zeros_like(ratio)
    phases = np.broadcast_to(np.asarray(phases, dtype=float), amplitudes.shape)
    ratio = (wp * cp * np.exp(1j * p * phases)).sum(axis=0) / denom
    magnitude = np.abs(ratio)
    zero = magnitude == 0
    with np.errstate(divide="ignore"):
        amp = np.where(zero, 0.0, magnitude ** (1.0 / p))
    return amp, np.where(zero, 0.0, np.angle(ratio) / p)
