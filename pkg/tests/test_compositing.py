import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hmcolor import (
    DimensionMismatch,
    DomainError,
    HMElement,
    InvalidMatrix,
    NotAVector,
    PhasedComplex,
    ZERO,
    as_phased,
    project,
)
from hmcolor.compositing import (
    Layer,
    MaterialMatrix,
    add_phase_composite,
    add_phase_sum,
    apply_material_matrix,
    attenuate,
    generalized_composite,
    inverse_square,
    over,
    parse_material_matrix,
)
from hmcolor.imageio import PhasedImage

SHAPE = (3, 4, 3)


def const(value, shape=SHAPE, phase=None):
    amp = np.full(shape, float(value))
    return PhasedImage(amp, None if phase is None else np.full(shape, phase))


def random_layer(rng, phased=False):
    amp = rng.uniform(0, 1, SHAPE)
    phase = rng.uniform(-math.pi, math.pi, SHAPE) if phased else None
    return Layer.from_straight(PhasedImage(amp, phase), rng.uniform(0, 1, SHAPE[:2]))


class TestOver:
    def test_opaque_and_transparent(self):
        rng = np.random.default_rng(0)
        fg, bg = random_layer(rng), random_layer(rng)
        opaque = Layer.opaque(fg.color)
        assert np.allclose(over(opaque, bg).color.amplitude, fg.color.amplitude, rtol=0, atol=0)
        clear = Layer(PhasedImage(np.zeros(SHAPE)), np.zeros(SHAPE[:2]))
        out = over(clear, bg)
        assert np.array_equal(out.color.amplitude, bg.color.amplitude)
        assert np.array_equal(out.alpha, bg.alpha)

    @pytest.mark.parametrize("seed", range(5))
    def test_associative(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_layer(rng, phased=True) for _ in range(3))
        left, right = over(over(a, b), c), over(a, over(b, c))
        assert np.abs(left.color.to_complex() - right.color.to_complex()).max() <= 1e-12
        assert np.abs(left.alpha - right.alpha).max() <= 1e-12

    def test_not_commutative(self):
        red = Layer.from_straight(const(1.0, (1, 1, 1)), np.full((1, 1), 0.5))
        blue = Layer.from_straight(const(0.0, (1, 1, 1)), np.full((1, 1), 1.0))
        assert over(red, blue).color.amplitude[0, 0, 0] == 0.5
        assert over(blue, red).color.amplitude[0, 0, 0] == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            over(Layer.opaque(const(1)), Layer.opaque(const(1, (2, 2, 3))))

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            Layer(const(1), np.full(SHAPE[:2], 1.5))


class TestAddPhase:
    def test_interference(self):
        same = add_phase_composite(const(1, phase=0.3), const(1, phase=0.3))
        assert np.allclose(same.amplitude, 1.0, rtol=1e-15)
        cancel = add_phase_composite(const(1), const(1, phase=math.pi))
        assert cancel.amplitude.max() <= 1e-15

    def test_white_phase(self):
        thetas = np.linspace(0, 2 * math.pi, 360).reshape(1, -1, 1)
        img0 = PhasedImage(np.ones(thetas.shape), thetas)
        img1 = PhasedImage(np.ones(thetas.shape), np.full(thetas.shape, 2 * math.pi))
        out = add_phase_composite(img0, img1)
        assert np.abs(out.amplitude - np.abs(np.cos(thetas / 2))).max() <= 1e-12

    def test_zero_phase_is_amplitude_sum(self):
        rng = np.random.default_rng(1)
        a, b = PhasedImage(rng.uniform(0, 1, SHAPE)), PhasedImage(rng.uniform(0, 1, SHAPE))
        out = add_phase_composite(a, b, 0.25)
        assert np.abs(out.amplitude - 0.25 * (a.amplitude + b.amplitude)).max() <= 1e-12

    def test_commutative_and_integer_associative(self):
        rng = np.random.default_rng(2)
        imgs = [PhasedImage(rng.integers(0, 100, SHAPE).astype(float), rng.integers(0, 2, SHAPE) * math.pi)
                for _ in range(3)]
        a, b, c = imgs
        assert np.array_equal(add_phase_composite(a, b).amplitude, add_phase_composite(b, a).amplitude)
        left = add_phase_composite(add_phase_composite(a, b, 1.0), c, 1.0)
        right = add_phase_composite(a, add_phase_composite(b, c, 1.0), 1.0)
        assert np.array_equal(left.amplitude, right.amplitude)
        assert np.array_equal(add_phase_sum(imgs).amplitude, left.amplitude)


class TestGeneralized:
    def fg_bg(self, x1, x0, a1=1.0, a0=1.0):
        shape = (1, 1, 1)
        fg = Layer.from_straight(const(x1, shape), np.full((1, 1), a1))
        bg = Layer.from_straight(const(x0, shape), np.full((1, 1), a0))
        return fg, bg

    def test_examples(self):
        fg, bg = self.fg_bg(0.5, 0.9)
        assert generalized_composite("add", fg, bg).color.amplitude[0, 0, 0] == pytest.approx(1.4)
        assert generalized_composite("hm", fg, bg, p=1, weights="equal").color.amplitude[0, 0, 0] == pytest.approx(0.7)
        hm = generalized_composite("hm", fg, bg, p=-1, weights="equal").color.amplitude[0, 0, 0]
        assert hm == pytest.approx(2 * 0.45 / 1.4, rel=1e-14)

    def test_mul_max_min(self):
        fg, bg = self.fg_bg(0.5, 0.9)
        assert generalized_composite("mul", fg, bg).color.amplitude[0, 0, 0] == pytest.approx(0.45)
        assert generalized_composite("max", fg, bg).color.amplitude[0, 0, 0] == 0.9
        assert generalized_composite("min", fg, bg).color.amplitude[0, 0, 0] == 0.5

    def test_max_rejects_phase(self):
        fg = Layer.opaque(const(0.5, (1, 1, 1), phase=1.0))
        bg = Layer.opaque(const(0.5, (1, 1, 1)))
        with pytest.raises(DomainError):
            generalized_composite("max", fg, bg)

    def test_partial_alpha_blend(self):
        fg, bg = self.fg_bg(0.5, 0.9, a1=0.25)
        out = generalized_composite("hm", fg, bg, p=1, weights="equal")
        assert out.color.amplitude[0, 0, 0] == pytest.approx(0.25 * 0.7 + 0.75 * 0.9)
        assert out.alpha[0, 0] == 1.0

    def test_unknown(self):
        fg, bg = self.fg_bg(0.5, 0.9)
        with pytest.raises(ValueError):
            generalized_composite("screen", fg, bg)
        with pytest.raises(ValueError):
            generalized_composite("hm", fg, bg)

    @given(st.floats(0.01, 1), st.floats(0.01, 1), st.sampled_from([-3, -1, -0.5, 0.5, 1, 2, 3]))
    def test_hm_in_range(self, x1, x0, p):
        fg, bg = self.fg_bg(x1, x0)
        v = generalized_composite("hm", fg, bg, p=p, weights="equal").color.amplitude[0, 0, 0]
        assert min(x0, x1) * (1 - 1e-12) <= v <= max(x0, x1) * (1 + 1e-12)

    def test_weight_planes(self):
        fg, bg = self.fg_bg(0.5, 0.9)
        out = generalized_composite("hm", fg, bg, p=1, weights=(np.full((1, 1), 3.0), np.full((1, 1), 1.0)))
        assert out.color.amplitude[0, 0, 0] == pytest.approx((3 * 0.5 + 0.9) / 4)


class TestMaterial:
    def pixel(self, values):
        return [HMElement(as_phased(complex(v)), ZERO) for v in values]

    def test_identity(self):
        px = self.pixel([0.2, 0.5j, -0.3])
        out = apply_material_matrix(MaterialMatrix.identity(3), px)
        assert [e.x.to_complex() for e in out] == pytest.approx([0.2, 0.5j, -0.3])

    def test_swap(self):
        swap = MaterialMatrix(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]]))
        out = apply_material_matrix(swap, self.pixel([0.1, 0.7, 0.3]))
        assert [e.x.amplitude for e in out] == pytest.approx([0.7, 0.1, 0.3])

    @pytest.mark.parametrize("seed", range(5))
    def test_concatenation(self, seed):
        rng = np.random.default_rng(seed)
        m1, m2 = (MaterialMatrix(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))) for _ in range(2))
        px = self.pixel(rng.normal(size=3) + 1j * rng.normal(size=3))
        seq = apply_material_matrix(m2, apply_material_matrix(m1, px))
        once = apply_material_matrix(m2 @ m1, px)
        for a, b in zip(seq, once):
            assert abs(a.x.to_complex() - b.x.to_complex()) <= 1e-12

    def test_linear_in_scalar(self):
        rng = np.random.default_rng(7)
        m = MaterialMatrix(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        values = rng.normal(size=3) + 1j * rng.normal(size=3)
        s = 0.3 - 1.2j
        scaled = apply_material_matrix(m, self.pixel(s * values))
        base = apply_material_matrix(m, self.pixel(values))
        for a, b in zip(scaled, base):
            assert abs(a.x.to_complex() - s * b.x.to_complex()) <= 1e-12

    def test_rejects_points(self):
        with pytest.raises(NotAVector):
            apply_material_matrix(MaterialMatrix.identity(1), [HMElement(PhasedComplex(1.0), PhasedComplex(1.0))])
        with pytest.raises(DimensionMismatch):
            apply_material_matrix(MaterialMatrix.identity(2), self.pixel([1.0]))

    def test_projective_row(self):
        good = np.eye(4, dtype=complex)
        MaterialMatrix(good, projective=True)
        bad = good.copy()
        bad[3, 0] = 0.5
        with pytest.raises(InvalidMatrix):
            MaterialMatrix(bad, projective=True)
        with pytest.raises(InvalidMatrix):
            MaterialMatrix(np.ones((2, 3)))

    def test_parse(self):
        m = parse_material_matrix("2\n1,0 0,1\n0,0 1,0\n")
        assert m.entries[0, 1] == 1j and not m.projective
        m4 = parse_material_matrix("1\n1,0 0,0\n0,0 1,0\n")
        assert m4.projective
        with pytest.raises(InvalidMatrix):
            parse_material_matrix("2\n1,0 0,0\n")
        with pytest.raises(InvalidMatrix):
            parse_material_matrix("1\n1\n")


class TestAttenuate:
    def test_inverse_square(self):
        light = HMElement(PhasedComplex(1.0), ZERO)
        assert project(inverse_square(light, 2.0)).amplitude == pytest.approx(0.25)
        assert project(attenuate(light, 1.0)).amplitude == 1.0

    def test_complex_term(self):
        light = HMElement(PhasedComplex(1.0), ZERO)
        out = project(attenuate(light, PhasedComplex(1.0, math.pi / 2)))
        assert out.phase == pytest.approx(-math.pi / 2)

    def test_needs_vector(self):
        with pytest.raises(NotAVector):
            attenuate(HMElement(PhasedComplex(1.0), PhasedComplex(1.0)), 2.0)
