"""Randomised property suites for the algebra, the affine solvers and the filters.

Every suite takes a numpy ``Generator`` and a case count and returns a
:class:`SuiteResult`.  ``run_suites`` seeds each suite from one integer, so a
report depends only on ``(seed, cases)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import affine
from .core import (
    IDENTITY,
    HMElement,
    PhasedComplex,
    acc_add,
    acc_new,
    classical_check,
    geometric_mean,
    hm_combine,
    hm_inverse,
    hm_max,
    hm_min,
    hm_nary,
    pc_pow,
    project,
    weighted_point,
)
from .filter import Kernel, dilate, erode, hm_filter
from .imageio import PhasedImage

P_GRID = (-3.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0)
LOG_RANGE = 3.0  # components drawn log-uniformly from [1e-3, 1e3]


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def check(self, condition: bool, detail) -> None:
        if condition:
            self.passed += 1
            return
        self.failed += 1
        if self.first_failure is None:
            self.first_failure = detail() if callable(detail) else str(detail)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        text = f"{status} {self.name}: {self.passed}/{self.passed + self.failed}"
        if self.first_failure:
            text += f"  first failure: {self.first_failure}"
        return text


def _positive(rng: np.random.Generator, size) -> np.ndarray:
    return 10.0 ** rng.uniform(-LOG_RANGE, LOG_RANGE, size)


def _point(x: float, a: float) -> HMElement:
    return HMElement(PhasedComplex(x), PhasedComplex(a))


def _rel(a: complex, b: complex) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def _proj(v: HMElement) -> complex:
    return project(v).to_complex()


# -- core laws -------------------------------------------------------------------


def associativity(rng, cases, ps=P_GRID, tol=1e-10) -> SuiteResult:
    """Left and right folds of three points project to the same value."""
    res = SuiteResult("associativity")
    for p in ps:
        comps = _positive(rng, (cases, 6)).tolist()
        for x0, a0, x1, a1, x2, a2 in comps:
            v0, v1, v2 = _point(x0, a0), _point(x1, a1), _point(x2, a2)
            left = _proj(hm_combine(p, hm_combine(p, v0, v1), v2))
            right = _proj(hm_combine(p, v0, hm_combine(p, v1, v2)))
            res.check(_rel(left, right) <= tol, lambda: f"p={p} {left} vs {right}")
    return res


def commutativity(rng, cases, ps=P_GRID) -> SuiteResult:
    res = SuiteResult("commutativity")
    for p in ps:
        for x0, a0, x1, a1 in _positive(rng, (cases, 4)).tolist():
            v0, v1 = _point(x0, a0), _point(x1, a1)
            ab, ba = hm_combine(p, v0, v1), hm_combine(p, v1, v0)
            res.check(ab == ba, lambda: f"p={p} {ab} vs {ba}")
    return res


def scale_invariance(rng, cases, ps=P_GRID, tol=1e-10) -> SuiteResult:
    """Scaling every x by s > 0 scales the projection by s."""
    res = SuiteResult("scale_invariance")
    for p in ps:
        for x0, a0, x1, a1, s in _positive(rng, (cases, 5)).tolist():
            base = _proj(hm_combine(p, _point(x0, a0), _point(x1, a1)))
            scaled = _proj(hm_combine(p, _point(s * x0, a0), _point(s * x1, a1)))
            res.check(_rel(scaled, s * base) <= tol, lambda: f"p={p} s={s} {scaled} vs {s * base}")
    return res


def identity_law(rng, cases, ps=P_GRID) -> SuiteResult:
    """Combining with (0, 0) returns the operand field for field."""
    res = SuiteResult("identity")
    for p in ps:
        for x, a in _positive(rng, (cases, 2)).tolist():
            v = _point(x, a)
            for out in (hm_combine(p, v, IDENTITY), hm_combine(p, IDENTITY, v)):
                same = (out.x.amplitude, out.x.phase, out.a.amplitude, out.a.phase) == (x, 0.0, a, 0.0)
                res.check(same, lambda: f"p={p} {v} -> {out}")
    return res


def inverse_law(rng, cases, ps=P_GRID, branches=(0, 1, 2), tol=1e-12) -> SuiteResult:
    """An element and its p-inverse leave (numerically) zero running sums."""
    res = SuiteResult("inverse")
    for p in ps:
        for x, a in _positive(rng, (cases, 2)).tolist():
            v = _point(x, a)
            for n in branches:
                acc = acc_add(acc_add(acc_new(p), v), hm_inverse(v, p, n))
                bound_x, bound_a = tol * x**p, tol * a**p
                res.check(
                    abs(acc.X) <= bound_x and abs(acc.A) <= bound_a,
                    lambda: f"p={p} n={n} X={acc.X} A={acc.A}",
                )
    return res


def weak_averaging(rng, cases, ps=P_GRID, slack=1e-12) -> SuiteResult:
    """With x1 = t x0 (t >= 1) and positive weights, the projection lies in [x0, x1]."""
    res = SuiteResult("weak_averaging")
    for p in ps:
        draws = _positive(rng, (cases, 3)).tolist()
        ts = (1.0 + _positive(rng, cases)).tolist()
        for (x0, w0, w1), t in zip(draws, ts):
            c = project(hm_combine(p, weighted_point(x0, w0), weighted_point(t * x0, w1)))
            ratio = c.amplitude / x0
            res.check(
                c.phase == 0.0 and 1.0 - slack <= ratio <= t * (1.0 + slack),
                lambda: f"p={p} t={t} ratio={ratio} phase={c.phase}",
            )
    return res


def monotonicity(rng, cases, ps=P_GRID, steps=8, slack=1e-12) -> SuiteResult:
    """z -> C(H_p(v0, (w1 z, w1))) is nondecreasing in z."""
    res = SuiteResult("monotonicity")
    for p in ps:
        for x0, w0, w1 in _positive(rng, (cases, 3)).tolist():
            v0 = weighted_point(x0, w0)
            zs = np.sort(_positive(rng, steps)).tolist()
            vals = [project(hm_combine(p, v0, weighted_point(z, w1))).amplitude for z in zs]
            ok = all(b >= a * (1.0 - slack) for a, b in zip(vals, vals[1:]))
            res.check(ok, lambda: f"p={p} values={vals}")
    return res


def closed_forms(rng, cases, tol=1e-12) -> SuiteResult:
    """Projected H_1 and H_-1 match the weighted and harmonic closed forms."""
    res = SuiteResult("closed_forms")
    for p in (1.0, -1.0):
        for x0, w0, x1, w1 in _positive(rng, (cases, 4)).tolist():
            v0, v1 = weighted_point(x0, w0), weighted_point(x1, w1)
            got = _proj(hm_combine(p, v0, v1))
            want = classical_check(p, v0, v1).to_complex()
            res.check(_rel(got, want) <= tol, lambda: f"p={p} {got} vs {want}")
    return res


def branch_roundtrip(rng, cases, ps=P_GRID) -> SuiteResult:
    """pow(pow(z, p), 1/p) reproduces z exactly, unbounded phase included."""
    res = SuiteResult("branch_roundtrip")
    for p in ps:
        amps = _positive(rng, cases).tolist()
        phases = rng.uniform(-20.0, 20.0, cases).tolist()
        for r, theta in zip(amps, phases):
            z = PhasedComplex(r, theta)
            back = pc_pow(pc_pow(z, p), 1.0 / p)
            res.check(
                (back.amplitude, back.phase) == (z.amplitude, z.phase),
                lambda: f"p={p} {z} -> {back}",
            )
    return res


def limit_consistency(rng, cases) -> SuiteResult:
    """Equal-weight H_p approaches max, min and the geometric mean monotonically."""
    res = SuiteResult("limit_consistency")
    grid = (4.0, 16.0, 64.0, 256.0)
    for _ in range(cases):
        xs = (10.0 ** rng.uniform(-1, 1, int(rng.integers(2, 6)))).tolist()
        ones = [1.0] * len(xs)
        pts = [weighted_point(x, 1.0) for x in xs]
        hi = [project(hm_nary(p, pts)).amplitude for p in grid]
        lo = [project(hm_nary(-p, pts)).amplitude for p in grid]
        top, bottom = hm_max(xs, ones), hm_min(xs, ones)
        up = all(b >= a * (1 - 1e-12) for a, b in zip(hi, hi[1:])) and hi[-1] <= top * (1 + 1e-12)
        down = all(b <= a * (1 + 1e-12) for a, b in zip(lo, lo[1:])) and lo[-1] >= bottom * (1 - 1e-12)
        # (n)^(-1/256) bounds the gap to the extreme value
        close = top - hi[-1] <= top * (1 - len(xs) ** (-1 / 256)) + 1e-12
        geo = project(hm_nary(1e-4, pts)).amplitude
        g = geometric_mean(xs, ones)
        res.check(up and down and close and abs(geo - g) <= 1e-3 * g,
                  lambda: f"xs={xs} hi={hi} lo={lo} geo={geo} vs {g}")
    return res


# -- affine ------------------------------------------------------------------------


def affine_partition(rng, cases) -> SuiteResult:
    """Positive weights give barycentric coefficients in [0, 1] that sum to 1."""
    res = SuiteResult("affine_partition")
    for _ in range(cases):
        w = _positive(rng, int(rng.integers(1, 8)))
        c = affine.partition_weights(w)
        res.check(np.all((c >= 0) & (c <= 1)) and abs(c.sum() - 1.0) <= 1e-12, lambda: f"w={w} c={c}")
    return res


def affine_line(rng, cases) -> SuiteResult:
    """line_point stays on the line; on the segment exactly when s1 >= 0."""
    res = SuiteResult("affine_line")
    for _ in range(cases):
        x0, x1 = rng.uniform(-10, 10, 3), rng.uniform(-10, 10, 3)
        s1 = float(rng.uniform(-5, 5))
        if abs(1 + s1) < 1e-3:
            s1 += 0.5
        pt = affine.line_point(x0, x1, s1)
        t = s1 / (1 + s1)
        on_line = np.allclose(pt, x0 + t * (x1 - x0), atol=1e-9)
        res.check(on_line and ((0 <= t <= 1) == (s1 >= 0)), lambda: f"s1={s1} t={t}")
    return res


def affine_addition(rng, cases) -> SuiteResult:
    """Integer homogeneous sums agree bitwise under any grouping; (x, w) + (-x, -w) = 0."""
    res = SuiteResult("affine_addition")
    for _ in range(cases):
        pts = [(rng.integers(-1000, 1000, 3).astype(float), float(rng.integers(-50, 50))) for _ in range(3)]
        (x0, w0), (x1, w1), (x2, w2) = pts
        left = ((x0 + x1) + x2, (w0 + w1) + w2)
        right = (x0 + (x1 + x2), w0 + (w1 + w2))
        swapped = ((x2 + x0) + x1, (w2 + w0) + w1)
        zx, zw = affine.homogeneous_sum([(x0, w0), (-x0, -w0)])
        ok = all(np.array_equal(left[0], o[0]) and left[1] == o[1] for o in (right, swapped))
        res.check(ok and not np.any(zx) and zw == 0, lambda: f"points={pts}")
    return res


def affine_bilinear(rng, cases) -> SuiteResult:
    """Solve-then-evaluate hits the four corners exactly; both patch forms agree."""
    res = SuiteResult("affine_bilinear")
    ts = np.linspace(0, 1, 11)
    for _ in range(cases):
        corners = [rng.integers(0, 256, 3).astype(float) for _ in range(4)]
        model = affine.solve_bilinear_lights(*corners)
        at = [model(0, 0), model(0, 1), model(1, 0), model(1, 1)]
        exact = all(np.array_equal(a, c) for a, c in zip(at, corners))
        agree = max(
            np.abs(model(t0, t1) - affine.eval_bilinear_barycentric(*corners, t0, t1)).max()
            for t0 in ts for t1 in ts
        )
        res.check(exact and agree <= 1e-12 * 256, lambda: f"corners={corners} gap={agree}")
    return res


# -- filters -----------------------------------------------------------------------


def brute_morph(amp: np.ndarray, weights: np.ndarray, op) -> np.ndarray:
    """Per-pixel max/min of ``w * c`` over positive taps with clamped indices."""
    h, w = amp.shape[:2]
    kh, kw = weights.shape
    n, m = kh // 2, kw // 2
    out = np.empty_like(amp)
    for i in range(h):
        for j in range(w):
            vals = [
                weights[di, dj] * amp[min(max(i + di - n, 0), h - 1), min(max(j + dj - m, 0), w - 1)]
                for di in range(kh) for dj in range(kw) if weights[di, dj] > 0
            ]
            out[i, j] = op(vals, axis=0)
    return out / weights.max()


def filter_oracles(rng, cases) -> SuiteResult:
    """Morphology matches brute force; p = 1 is normalised convolution; constants are fixed."""
    res = SuiteResult("filter_oracles")
    for _ in range(cases):
        h, w = (int(v) for v in rng.integers(3, 9, 2))
        weights = rng.uniform(0, 1, (2 * int(rng.integers(0, 2)) + 1, 2 * int(rng.integers(0, 2)) + 1))
        weights[weights < 0.2] = 0.0
        if not weights.any():
            weights[weights.shape[0] // 2, weights.shape[1] // 2] = 1.0
        kernel = Kernel(weights)
        amp = rng.uniform(0.1, 1.0, (h, w, 1))
        img = PhasedImage(amp)
        morph = np.array_equal(dilate(img, kernel).amplitude, brute_morph(amp, weights, np.max)) and \
            np.array_equal(erode(img, kernel).amplitude, brute_morph(amp, weights, np.min))
        conv = _direct_convolution(amp, weights)
        linear = np.abs(hm_filter(img, kernel, 1.0).amplitude - conv).max() <= 1e-12
        const = PhasedImage(np.full((h, w, 1), float(rng.uniform(0.1, 1.0))))
        p = float(rng.choice(P_GRID))
        flat = np.abs(hm_filter(const, kernel, p).amplitude - const.amplitude).max() <= 1e-10
        res.check(morph and linear and flat, lambda: f"morph={morph} linear={linear} const={flat} p={p}")
    return res


def _direct_convolution(amp: np.ndarray, weights: np.ndarray) -> np.ndarray:
    h, w = amp.shape[:2]
    kh, kw = weights.shape
    n, m = kh // 2, kw // 2
    padded = np.pad(amp, ((n, n), (m, m), (0, 0)), mode="edge")
    out = np.zeros_like(amp)
    for di in range(kh):
        for dj in range(kw):
            out += weights[di, dj] * padded[di : di + h, dj : dj + w]
    return out / weights.sum()


SUITES: dict[str, Callable[[np.random.Generator, int], SuiteResult]] = {
    "weak_averaging": weak_averaging,
    "associativity": associativity,
    "commutativity": commutativity,
    "scale_invariance": scale_invariance,
    "monotonicity": monotonicity,
    "identity": identity_law,
    "inverse": inverse_law,
    "closed_forms": closed_forms,
    "branch_roundtrip": branch_roundtrip,
    "limit_consistency": limit_consistency,
    "affine_partition": affine_partition,
    "affine_line": affine_line,
    "affine_addition": affine_addition,
    "affine_bilinear": affine_bilinear,
    "filter_oracles": filter_oracles,
}


def run_suites(seed: int = 0, cases: int = 200, names=None) -> list[SuiteResult]:
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites: {', '.join(unknown)}")
    seeds = np.random.SeedSequence(seed).spawn(len(SUITES))
    by_name = dict(zip(SUITES, seeds))
    return [SUITES[n](np.random.default_rng(by_name[n]), cases) for n in names]


def format_report(results: list[SuiteResult], seed: int, cases: int) -> str:
    lines = [f"seed={seed} cases={cases}"]
    lines += [r.line() for r in results]
    failed = sum(not r.ok for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} suites passed")
    return "\n".join(lines)
